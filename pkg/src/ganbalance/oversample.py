"""SMOTE baseline and the support-vector-guided variant.

Both emit a SyntheticBatch carrying per-row provenance (base row, neighbour
row, interpolation factor, mode) so segment/extrapolation identities can be
re-checked after the fact.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from .core import Dataset, class_partition, make_rng, child_seed
from .errors import DegenerateDataError
from .neighbors import knn
from .svm import SvmModel, SvmHyperparams, train_linear_svm, positive_support_vectors

MODE_SMOTE = "smote"
MODE_INTERPOLATION = "interpolation"
MODE_EXTRAPOLATION = "extrapolation"

STRATEGIES = ("none", "smote", "svm_smote", "gbo", "ssg")


@dataclass(frozen=True)
class OversampleRequest:
    n_synthetic: int
    k: int = 5    # neighbours used for synthesis
    m: int = 10   # neighbours used for the interpolate/extrapolate decision
    seed: int = 0

    def __post_init__(self):
        if self.n_synthetic < 0 or self.k < 1 or self.m < 1:
            raise DegenerateDataError("n_synthetic must be >= 0 and k, m >= 1")


@dataclass(frozen=True)
class Provenance:
    base_index: int        # row id in the training set
    neighbor_index: int    # row id in the training set
    delta: float
    mode: str
    clamped: bool = False


@dataclass
class SyntheticBatch:
    samples: np.ndarray  # (n_synthetic, n_features), all labelled minority
    provenance: list[Provenance] = field(default_factory=list)

    def __post_init__(self):
        self.samples = np.atleast_2d(np.asarray(self.samples, dtype=np.float64))
        if len(self.provenance) != self.samples.shape[0]:
            raise DegenerateDataError("provenance rows must match sample rows")
        if self.samples.size and not np.all(np.isfinite(self.samples)):
            raise DegenerateDataError("synthetic samples contain non-finite values")


def _empty_batch(n_features: int) -> SyntheticBatch:
    return SyntheticBatch(np.empty((0, n_features)), [])


def _effective_k(k: int, available: int, what: str) -> int:
    if available < 1:
        raise DegenerateDataError(f"no eligible {what} neighbours")
    if k > available:
        warnings.warn(f"shrinking {what} k from {k} to {available} (small class)")
        return available
    return k


def smote(train: Dataset, req: OversampleRequest) -> SyntheticBatch:
    """Classic minority interpolation: x + delta * (nn - x), delta ~ U[0,1]."""
    minority_idx, _ = class_partition(train)
    if minority_idx.size < 2:
        raise DegenerateDataError(f"SMOTE needs >= 2 minority rows, got {minority_idx.size}")
    if req.n_synthetic == 0:
        return _empty_batch(train.n_features)
    X_min = train.features[minority_idx]
    k = _effective_k(req.k, minority_idx.size - 1, "minority")
    neighbor_table = [
        knn(X_min[i], X_min, k, exclude=i).neighbor_indices for i in range(minority_idx.size)
    ]
    rng = make_rng(req.seed)
    samples = np.empty((req.n_synthetic, train.n_features))
    prov = []
    for r in range(req.n_synthetic):
        b = int(rng.integers(minority_idx.size))
        nn_local = int(neighbor_table[b][int(rng.integers(k))])
        delta = float(rng.uniform())
        samples[r] = X_min[b] + delta * (X_min[nn_local] - X_min[b])
        prov.append(Provenance(int(minority_idx[b]), int(minority_idx[nn_local]),
                               delta, MODE_SMOTE))
    return SyntheticBatch(samples, prov)


def svm_smote(train: Dataset, model: SvmModel, req: OversampleRequest,
              clamp_box=(0.0, 1.0)) -> SyntheticBatch:
    """Synthesize around positive support vectors.

    The share of each support vector is floor(T / |SV+|) with the first
    T mod |SV+| vectors taking one extra. A support vector whose
    m-neighbourhood in the full training set is majority-dominated
    (strictly more than m/2 majority rows; ties extrapolate) interpolates
    toward a minority neighbour, otherwise it extrapolates away from one.
    Extrapolated rows are clamped to the scaled feature box and flagged.
    """
    minority_idx, _ = class_partition(train)
    if minority_idx.size < 2:
        raise DegenerateDataError(
            f"SVM-SMOTE needs >= 2 minority rows, got {minority_idx.size}"
        )
    if req.n_synthetic == 0:
        return _empty_batch(train.n_features)
    sv_rows = positive_support_vectors(model, train)
    n_sv = sv_rows.size
    T = req.n_synthetic
    amounts = np.full(n_sv, T // n_sv, dtype=np.int64)
    amounts[: T % n_sv] += 1

    X = train.features
    X_min = X[minority_idx]
    minority_set = set(int(i) for i in minority_idx)
    m = _effective_k(req.m, train.n_samples - 1, "decision")
    k = _effective_k(req.k, minority_idx.size - 1, "minority")
    local_of_row = {int(row): loc for loc, row in enumerate(minority_idx)}

    rng = make_rng(req.seed)
    samples = np.empty((T, train.n_features))
    prov = []
    lo, hi = clamp_box
    r = 0
    for sv_row, amount in zip(sv_rows, amounts):
        sv_row = int(sv_row)
        sv = X[sv_row]
        hood = knn(sv, X, m, exclude=sv_row)
        n_majority = sum(1 for j in hood.neighbor_indices if int(j) not in minority_set)
        interpolate = n_majority > m / 2
        min_nn = knn(sv, X_min, k, exclude=local_of_row[sv_row]).neighbor_indices
        for _ in range(int(amount)):
            nn_local = int(min_nn[int(rng.integers(k))])
            x_nn = X_min[nn_local]
            delta = float(rng.uniform())
            if interpolate:
                new = sv + delta * (x_nn - sv)
                mode, clamped = MODE_INTERPOLATION, False
            else:
                new = sv + delta * (sv - x_nn)
                clipped = np.clip(new, lo, hi)
                clamped = bool(np.any(clipped != new))
                new, mode = clipped, MODE_EXTRAPOLATION
            samples[r] = new
            prov.append(Provenance(sv_row, int(minority_idx[nn_local]), delta, mode, clamped))
            r += 1
    return SyntheticBatch(samples, prov)


def synthesize(train: Dataset, method: str, n_synthetic: int, seed: int = 0,
               k: int = 5, m: int = 10, gan_config=None) -> SyntheticBatch:
    """Dispatch to one oversampling method and return its raw batch."""
    if method not in STRATEGIES:
        raise DegenerateDataError(f"unknown oversampling method {method!r}")
    if method == "none" or n_synthetic == 0:
        return _empty_batch(train.n_features)
    if method == "smote":
        return smote(train, OversampleRequest(n_synthetic, k=k, m=m, seed=seed))
    if method == "svm_smote":
        model = train_linear_svm(train, SvmHyperparams(), seed=child_seed(seed, 0))
        return svm_smote(train, model,
                         OversampleRequest(n_synthetic, k=k, m=m, seed=child_seed(seed, 1)))
    from . import gan  # deferred: gan depends on this module

    cfg = gan_config if gan_config is not None else gan.GanConfig(seed=seed)
    if method == "gbo":
        return gan.gbo_oversample(train, n_synthetic, cfg)
    return gan.ssg_oversample(train, n_synthetic, cfg, k=k, m=m)


def append_synthetic(train: Dataset, batch: SyntheticBatch) -> Dataset:
    """Original rows verbatim, synthetic rows appended with label 1."""
    if batch.samples.shape[0] == 0:
        return train
    features = np.vstack([train.features, batch.samples])
    labels = np.concatenate(
        [train.labels, np.ones(batch.samples.shape[0], dtype=np.int64)]
    )
    return Dataset(features, labels, train.feature_names)


def balance_to_parity(train: Dataset, method: str, seed: int = 0,
                      k: int = 5, m: int = 10, gan_config=None) -> Dataset:
    """Append synthetic minority rows until the classes have equal counts.

    ``method`` is one of 'none', 'smote', 'svm_smote', 'gbo', 'ssg'.
    Already-balanced input comes back unchanged.
    """
    major, minor = train.class_counts()
    n_synthetic = max(0, major - minor)
    batch = synthesize(train, method, n_synthetic, seed=seed, k=k, m=m,
                       gan_config=gan_config)
    return append_synthetic(train, batch)
