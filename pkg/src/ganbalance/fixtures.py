"""Synthetic imbalanced datasets for tests and desk-scale benchmark runs.

Real benchmark CSVs are user-supplied; these fixtures only reproduce class
counts and feature counts of the usual UCI benchmark shapes with seeded
Gaussian blobs, so count arithmetic and directional checks can run
anywhere.
"""

from __future__ import annotations

import numpy as np

from .core import Dataset, make_rng
from .errors import ConfigError

# name -> (majority count, minority count, n_features)
TABLE_SHAPES = {
    "pageblocks": (443, 28, 10),
    "ecoli": (315, 20, 7),
    "winequality": (637, 18, 10),
    "abalone": (3337, 840, 8),
    "ionosphere": (225, 126, 34),
    "spambase": (2788, 1812, 57),
    "shuttle": (57830, 170, 9),
    "yeast": (462, 51, 8),
}


def make_imbalanced(n_major: int, n_minor: int, n_features: int,
                    seed: int = 0, separation: float = 2.0,
                    marginals: str = "normal") -> Dataset:
    """Two partially overlapping blobs; label 1 is the minority.

    ``marginals="normal"`` gives plain Gaussian features; ``"lognormal"``
    warps them through exp() for right-skewed marginals resembling real
    measurement data (UCI-style feature distributions are rarely Gaussian,
    and distribution-shape diagnostics are vacuous on Gaussian input).
    """
    if marginals not in ("normal", "lognormal"):
        raise ConfigError(f"unknown marginals {marginals!r}")
    rng = make_rng(seed)
    offset = separation * rng.uniform(0.3, 1.0, size=n_features) / np.sqrt(n_features)
    major = rng.standard_normal((n_major, n_features))
    minor = rng.standard_normal((n_minor, n_features)) * 0.8 + offset
    features = np.vstack([major, minor])
    if marginals == "lognormal":
        features = np.exp(0.75 * features)
    labels = np.concatenate([np.zeros(n_major, dtype=np.int64),
                             np.ones(n_minor, dtype=np.int64)])
    order = rng.permutation(features.shape[0])
    return Dataset(features[order], labels[order])


def shape_fixture(name: str, seed: int = 0, marginals: str = "normal") -> Dataset:
    n_major, n_minor, n_features = TABLE_SHAPES[name]
    return make_imbalanced(n_major, n_minor, n_features, seed=seed,
                           marginals=marginals)
