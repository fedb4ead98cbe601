"""Adversarial training loop plus the two GAN-backed oversamplers.

GBO trains a generator from Gaussian noise on the minority rows alone and
emits its outputs as synthetic minority samples. SSG feeds the generator
with SVM-SMOTE oversamples instead of noise, so its input batches already
live on the data manifold; the emitted batch is the generator applied to
freshly drawn SVM-SMOTE samples.
"""

from __future__ import annotations

import csv
import json
import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .core import Dataset, class_partition, make_rng, child_seed
from .errors import DegenerateDataError, TrainingError
from .nnet import (DenseNet, LayerSpec, bce_loss, finite_difference_max_error)
from .oversample import (OversampleRequest, Provenance, SyntheticBatch, svm_smote)
from .svm import SvmHyperparams, train_linear_svm

SEED_NOISE = "noise"
SEED_SVM_SMOTE = "svm_smote_seeded"

MODE_COLLAPSE_STD = 1e-6


@dataclass
class GanConfig:
    latent_dim: int = 32  # noise-seeded generator input width
    generator_hidden: tuple = (128, 256, 512, 1024)
    discriminator_hidden: tuple = (512, 256, 128)
    batch_size: int = 32
    learning_rate: float = 1e-5
    epochs: int = 500
    d_steps_per_g_step: int = 1
    seed: int = 0
    # Rolling stability early stop: compare consecutive window means of
    # |d_loss - ln 2|; fires only after stability_min_epochs.
    stability_window: int = 20
    stability_tol: float | None = 1e-5
    stability_min_epochs: int = 100


@dataclass
class SeedBatch:
    source: str  # SEED_NOISE or SEED_SVM_SMOTE
    data: np.ndarray


@dataclass
class GanModel:
    generator: DenseNet
    discriminator: DenseNet
    loss_history: list  # per-epoch (d_loss, g_loss)
    seed_mode: str
    config: GanConfig
    stopped_epoch: int = 0
    stop_reason: str = "epoch_cap"
    mode_collapsed: bool = False


def discriminator_loss(d_real, d_fake) -> float:
    """-[mean log D(real) + mean log(1 - D(fake))], predictions clamped."""
    return bce_loss(d_real, np.ones(np.asarray(d_real).size)) + bce_loss(
        d_fake, np.zeros(np.asarray(d_fake).size)
    )


def generator_loss(d_fake) -> float:
    """Non-saturating generator objective -mean log D(fake)."""
    return bce_loss(d_fake, np.ones(np.asarray(d_fake).size))


def _build_generator(input_width: int, n_features: int, cfg: GanConfig,
                     seed: int) -> DenseNet:
    sizes = [input_width, *cfg.generator_hidden]
    specs = [LayerSpec(a, b, "relu") for a, b in zip(sizes, sizes[1:])]
    specs.append(LayerSpec(sizes[-1], n_features, "sigmoid"))
    return DenseNet(specs, init_seed=seed)


def _build_discriminator(n_features: int, cfg: GanConfig, seed: int) -> DenseNet:
    sizes = [n_features, *cfg.discriminator_hidden]
    specs = [LayerSpec(a, b, "leaky_relu") for a, b in zip(sizes, sizes[1:])]
    specs.append(LayerSpec(sizes[-1], 1, "sigmoid"))
    return DenseNet(specs, init_seed=seed)


def _draw_seeds(rng, n: int, source: str, cfg: GanConfig, pool: np.ndarray | None):
    if source == SEED_NOISE:
        return rng.standard_normal((n, cfg.latent_dim))
    idx = rng.integers(pool.shape[0], size=n)
    return pool[idx]


def train_gan(minority: np.ndarray, cfg: GanConfig,
              seed_pool: np.ndarray | None = None) -> GanModel:
    """Alternate one discriminator step and one generator step per batch.

    ``seed_pool`` switches the generator input: None means Gaussian noise
    (latent_dim wide); a matrix means batches are drawn from its rows with
    replacement (SSG mode, input width = n_features). Minority classes
    smaller than the batch size are sampled with replacement.
    """
    X = np.asarray(minority, dtype=np.float64)
    if X.ndim != 2 or X.shape[0] < 2:
        raise DegenerateDataError("GAN training needs a (n>=2, f) minority matrix")
    n_min, n_features = X.shape
    source = SEED_NOISE if seed_pool is None else SEED_SVM_SMOTE
    gen_in = cfg.latent_dim if seed_pool is None else n_features

    gen = _build_generator(gen_in, n_features, cfg, child_seed(cfg.seed, 1))
    disc = _build_discriminator(n_features, cfg, child_seed(cfg.seed, 2))
    rng = make_rng(child_seed(cfg.seed, 3))

    bs = cfg.batch_size
    batches_per_epoch = max(1, n_min // bs)
    ln2 = math.log(2.0)
    history: list[tuple[float, float]] = []
    stop_reason = "epoch_cap"
    epoch = 0
    for epoch in range(1, cfg.epochs + 1):
        d_sum = g_sum = 0.0
        for _ in range(batches_per_epoch):
            for _ in range(cfg.d_steps_per_g_step):
                real = X[rng.integers(n_min, size=bs)] if n_min < bs else \
                    X[rng.choice(n_min, size=bs, replace=False)]
                seeds = _draw_seeds(rng, bs, source, cfg, seed_pool)
                _, fake = gen.forward(seeds, cache=False)
                batch = np.vstack([real, fake])
                targets = np.concatenate([np.ones(bs), np.zeros(bs)])
                _, d_out = disc.forward(batch)
                d_grads, _ = disc.backward(targets=targets)
                disc.adam_step(d_grads, cfg.learning_rate)
                d_sum += discriminator_loss(d_out[:bs], d_out[bs:])
            seeds = _draw_seeds(rng, bs, source, cfg, seed_pool)
            _, fake = gen.forward(seeds)
            _, d_fake = disc.forward(fake)
            # BCE-vs-ones through the frozen discriminator is exactly
            # -mean log D(fake); only its input gradient is used.
            _, to_gen = disc.backward(targets=np.ones(bs))
            g_grads, _ = gen.backward(output_grad=to_gen)
            gen.adam_step(g_grads, cfg.learning_rate)
            g_sum += generator_loss(d_fake)
        d_loss = d_sum / (batches_per_epoch * cfg.d_steps_per_g_step)
        g_loss = g_sum / batches_per_epoch
        if not (np.isfinite(d_loss) and np.isfinite(g_loss)):
            raise TrainingError(f"GAN loss non-finite at epoch {epoch}")
        history.append((float(d_loss), float(g_loss)))
        if _stability_stop(history, cfg, ln2):
            stop_reason = "stability"
            break

    model = GanModel(gen, disc, history, source, cfg, epoch, stop_reason)
    sample = gen.predict(_draw_seeds(make_rng(child_seed(cfg.seed, 4)),
                                     max(bs, 8), source, cfg, seed_pool))
    if float(np.max(sample.std(axis=0))) < MODE_COLLAPSE_STD:
        model.mode_collapsed = True
        warnings.warn("possible mode collapse: generated batch has near-zero variance")
    return model


def _stability_stop(history, cfg: GanConfig, ln2: float) -> bool:
    if cfg.stability_tol is None:
        return False
    w = cfg.stability_window
    if len(history) < max(cfg.stability_min_epochs, 2 * w):
        return False
    dev = np.array([abs(d - ln2) for d, _ in history])
    return abs(dev[-w:].mean() - dev[-2 * w:-w].mean()) < cfg.stability_tol


def generate(model: GanModel, n: int, seed: int,
             seed_pool: np.ndarray | None = None) -> np.ndarray:
    """Draw n samples from the trained generator, clamped to the unit box."""
    rng = make_rng(seed)
    seeds = _draw_seeds(rng, n, model.seed_mode, model.config, seed_pool)
    return np.clip(model.generator.predict(seeds), 0.0, 1.0)


def gbo_oversample(train: Dataset, n_synthetic: int, cfg: GanConfig) -> SyntheticBatch:
    """Noise-seeded GAN oversampling on the minority rows."""
    minority_idx, _ = class_partition(train)
    if minority_idx.size < 2:
        raise DegenerateDataError("GBO needs >= 2 minority rows")
    model = train_gan(train.features[minority_idx], cfg)
    if n_synthetic == 0:
        batch = SyntheticBatch(np.empty((0, train.n_features)), [])
        batch.gan_model = model
        return batch
    samples = generate(model, n_synthetic, child_seed(cfg.seed, 5))
    prov = [Provenance(-1, -1, 0.0, "gbo") for _ in range(n_synthetic)]
    batch = SyntheticBatch(samples, prov)
    batch.gan_model = model
    return batch


def ssg_oversample(train: Dataset, n_synthetic: int, cfg: GanConfig,
                   k: int = 5, m: int = 10) -> SyntheticBatch:
    """SVM-SMOTE-seeded GAN oversampling.

    The generator consumes SVM-SMOTE oversamples (input width equals the
    feature count, no latent noise); the emitted batch is the generator
    applied to freshly drawn SVM-SMOTE samples, with each output's
    SVM-SMOTE parent row recorded in the provenance.
    """
    minority_idx, _ = class_partition(train)
    if minority_idx.size < 2:
        raise DegenerateDataError("SSG needs >= 2 minority rows")
    svm_model = train_linear_svm(train, SvmHyperparams(), seed=child_seed(cfg.seed, 10))
    pool_size = max(2 * minority_idx.size, cfg.batch_size)
    pool = svm_smote(train, svm_model,
                     OversampleRequest(pool_size, k=k, m=m, seed=child_seed(cfg.seed, 11)))
    model = train_gan(train.features[minority_idx], cfg, seed_pool=pool.samples)
    if n_synthetic == 0:
        batch = SyntheticBatch(np.empty((0, train.n_features)), [])
        batch.gan_model = model
        return batch
    fresh = svm_smote(train, svm_model,
                      OversampleRequest(n_synthetic, k=k, m=m, seed=child_seed(cfg.seed, 12)))
    samples = np.clip(model.generator.predict(fresh.samples), 0.0, 1.0)
    prov = [Provenance(p.base_index, p.neighbor_index, p.delta, "ssg") for p in fresh.provenance]
    batch = SyntheticBatch(samples, prov)
    batch.gan_model = model
    return batch


def composite_grad_check(gen: DenseNet, disc: DenseNet, seeds,
                         h: float = 1e-4, sample_per_tensor: int | None = 20,
                         seed: int = 0) -> float:
    """Verify generator gradients flowing through a frozen discriminator."""
    seeds = np.atleast_2d(np.asarray(seeds, dtype=np.float64))
    n = seeds.shape[0]
    gen.forward(seeds)
    _, fake = gen.forward(seeds)
    disc.forward(fake)
    _, to_gen = disc.backward(targets=np.ones(n))
    g_grads, _ = gen.backward(output_grad=to_gen)

    def loss_fn():
        _, f = gen.forward(seeds, cache=False)
        _, d = disc.forward(f, cache=False)
        return generator_loss(d)

    return finite_difference_max_error(loss_fn, gen.parameters(), g_grads, h,
                                       sample_per_tensor, seed)


def write_loss_history(model: GanModel, path) -> None:
    """Epoch-indexed (d_loss, g_loss) CSV for loss-curve plots."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["epoch", "d_loss", "g_loss"])
        for i, (d, g) in enumerate(model.loss_history, start=1):
            writer.writerow([i, repr(d), repr(g)])


def save_generator(model: GanModel, path) -> None:
    state = model.generator.state_dict()
    state["seed_mode"] = model.seed_mode
    with open(path, "w") as fh:
        json.dump(state, fh, sort_keys=True)


def load_generator(path) -> DenseNet:
    with open(path) as fh:
        state = json.load(fh)
    return DenseNet.from_state_dict(state)
