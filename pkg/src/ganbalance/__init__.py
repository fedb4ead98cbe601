"""GAN-based oversampling for imbalanced binary classification.

Implements the SMOTE baseline, SVM-SMOTE, GAN-based oversampling (GBO) and
SVM-SMOTE-GAN (SSG), plus the dense-network engine, linear SVM, metrics and
benchmark harness needed to evaluate them.
"""

from .core import (Dataset, ScalerParams, SplitSpec, load_csv, save_csv,
                   minmax_fit, minmax_apply, minmax_invert, train_test_split,
                   class_partition, make_rng, child_seed)
from .neighbors import NeighborList, knn
from .svm import SvmModel, SvmHyperparams, train_linear_svm, positive_support_vectors
from .oversample import (OversampleRequest, SyntheticBatch, Provenance, smote,
                         svm_smote, synthesize, append_synthetic, balance_to_parity)
from .nnet import (LayerSpec, DenseNet, TrainConfig, TrainReport, bce_loss,
                   build_classifier, train_supervised, grad_check, grid_search)
from .gan import (GanConfig, GanModel, SeedBatch, discriminator_loss,
                  generator_loss, train_gan, gbo_oversample, ssg_oversample,
                  composite_grad_check)
from .evaluate import (Confusion, MetricSet, RunAggregate, confusion, metrics,
                       misclassification_count, feature_std, histogram,
                       ks_statistic, aggregate)

__version__ = "0.1.0"
