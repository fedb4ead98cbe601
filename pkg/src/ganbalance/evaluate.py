"""Confusion-matrix metrics, misclassification counting, distribution
diagnostics and multi-run aggregation. Class 1 (minority) is positive.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import ndtr

from .errors import ConfigError, DegenerateDataError


@dataclass(frozen=True)
class Confusion:
    tp: int
    fp: int
    tn: int
    fn: int

    @property
    def total(self) -> int:
        return self.tp + self.fp + self.tn + self.fn


@dataclass(frozen=True)
class MetricSet:
    accuracy: float
    precision: float
    recall: float
    f1: float
    # True when a zero denominator forced the corresponding metric to 0.
    undefined_precision: bool = False
    undefined_recall: bool = False
    undefined_f1: bool = False

    def as_dict(self) -> dict:
        return {
            "accuracy": self.accuracy,
            "precision": self.precision,
            "recall": self.recall,
            "f1": self.f1,
        }


@dataclass(frozen=True)
class RunAggregate:
    mean: dict
    max: dict
    std: dict


def confusion(predictions, labels) -> Confusion:
    p = np.asarray(predictions, dtype=np.int64).ravel()
    y = np.asarray(labels, dtype=np.int64).ravel()
    if p.shape != y.shape:
        raise ConfigError(f"length mismatch: {p.size} predictions vs {y.size} labels")
    return Confusion(
        tp=int(np.sum((p == 1) & (y == 1))),
        fp=int(np.sum((p == 1) & (y == 0))),
        tn=int(np.sum((p == 0) & (y == 0))),
        fn=int(np.sum((p == 0) & (y == 1))),
    )


def metrics(c: Confusion) -> MetricSet:
    """Accuracy, precision, recall (tp / (tp + fn)), F1.

    Zero-denominator cases return 0 with the matching flag set, so a
    degenerate run cannot poison a multi-run mean with NaN.
    """
    if c.total == 0:
        raise DegenerateDataError("empty confusion matrix")
    # written as 1 - errors/total so the misclassification identity is
    # bitwise exact (mathematically identical to (tp + tn)/total)
    accuracy = 1.0 - (c.fp + c.fn) / c.total
    und_p = c.tp + c.fp == 0
    und_r = c.tp + c.fn == 0
    precision = 0.0 if und_p else c.tp / (c.tp + c.fp)
    recall = 0.0 if und_r else c.tp / (c.tp + c.fn)
    und_f = precision + recall == 0.0
    f1 = 0.0 if und_f else 2.0 * precision * recall / (precision + recall)
    return MetricSet(accuracy, precision, recall, f1, und_p, und_r, und_f)


def misclassification_count(c: Confusion) -> int:
    return c.fp + c.fn


def feature_std(X) -> tuple[np.ndarray, float]:
    """Per-feature sample std (n-1 denominator) and the pooled scalar
    sqrt(mean of per-feature variances)."""
    X = np.atleast_2d(np.asarray(X, dtype=np.float64))
    if X.shape[0] < 2:
        raise DegenerateDataError("feature_std needs >= 2 rows")
    var = X.var(axis=0, ddof=1)
    return np.sqrt(var), float(np.sqrt(var.mean()))


def histogram(values, bins: int):
    v = np.asarray(values, dtype=np.float64).ravel()
    if v.size == 0:
        raise DegenerateDataError("histogram of empty input")
    if bins < 1:
        raise ConfigError("bins must be >= 1")
    counts, edges = np.histogram(v, bins=bins)
    return edges, counts


def ks_statistic(values) -> float:
    """Kolmogorov-Smirnov distance between the empirical CDF and a normal
    fitted by sample mean and std. Constant input returns 0."""
    v = np.sort(np.asarray(values, dtype=np.float64).ravel())
    if v.size == 0:
        raise DegenerateDataError("ks_statistic of empty input")
    mu = v.mean()
    sigma = v.std(ddof=1) if v.size > 1 else 0.0
    if sigma == 0.0:
        return 0.0
    cdf = ndtr((v - mu) / sigma)
    n = v.size
    upper = np.arange(1, n + 1) / n
    lower = np.arange(0, n) / n
    return float(max(np.max(upper - cdf), np.max(cdf - lower)))


def aggregate(runs: list[MetricSet]) -> RunAggregate:
    """Per-metric mean, max and std over repetitions (sample std; 0 for a
    single run)."""
    if not runs:
        raise DegenerateDataError("aggregate of empty run list")
    keys = ("accuracy", "precision", "recall", "f1")
    cols = {k: np.array([getattr(r, k) for r in runs]) for k in keys}
    ddof = 1 if len(runs) > 1 else 0
    return RunAggregate(
        mean={k: float(c.mean()) for k, c in cols.items()},
        max={k: float(c.max()) for k, c in cols.items()},
        std={k: float(c.std(ddof=ddof)) for k, c in cols.items()},
    )
