"""Linear soft-margin SVM used as a support-vector detector.

Primal objective 0.5*||w||^2 + C * sum(max(0, 1 - y * (w.x + b))) with
labels mapped {0 -> -1, 1 -> +1}. Trained by full-batch subgradient
descent with a decaying step and backtracking, so the objective is
non-increasing across epochs and training is fully deterministic.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .core import Dataset
from .errors import DegenerateDataError, TrainingError

SUPPORT_TOL = 1e-3
FALLBACK_SUPPORT_COUNT = 3  # smallest-margin minority rows when none qualify


@dataclass
class SvmHyperparams:
    C: float = 1.0
    epochs: int = 200
    lr: float = 0.5
    tol: float = SUPPORT_TOL


@dataclass
class SvmModel:
    weights: np.ndarray
    bias: float
    support_indices: np.ndarray  # rows with functional margin <= 1 + tol
    hyperparams: SvmHyperparams
    objective_history: list = field(default_factory=list)

    def decision(self, X) -> np.ndarray:
        return np.asarray(X, dtype=np.float64) @ self.weights + self.bias


def _objective(w, b, X, y, C):
    margins = y * (X @ w + b)
    return 0.5 * float(w @ w) + C * float(np.maximum(0.0, 1.0 - margins).sum())


def train_linear_svm(train: Dataset, hyperparams: SvmHyperparams | None = None,
                     seed: int = 0) -> SvmModel:
    """Fit the hyperplane and record which training rows sit on the margin.

    ``seed`` is accepted for interface symmetry; the full-batch solver is
    deterministic regardless.
    """
    hp = hyperparams or SvmHyperparams()
    major, minor = train.class_counts()
    if minor == 0 or major == 0:
        raise DegenerateDataError("SVM training needs both classes present")
    X = train.features
    y = np.where(train.labels == 1, 1.0, -1.0)
    n = X.shape[0]

    w = np.zeros(train.n_features)
    b = 0.0
    # Normalize the hinge term's scale so the initial step size is data-independent.
    scale = 1.0 / (hp.C * n)
    loss = _objective(w, b, X, y, hp.C)
    history = [loss]
    step = hp.lr * scale
    for t in range(1, hp.epochs + 1):
        margins = y * (X @ w + b)
        viol = margins < 1.0
        gw = w - hp.C * (y[viol][:, None] * X[viol]).sum(axis=0)
        gb = -hp.C * float(y[viol].sum())
        # Grow the step on every accepted move, halve it until the move
        # stops increasing the objective: monotone and deterministic.
        for _ in range(40):
            w_new = w - step * gw
            b_new = b - step * gb
            new_loss = _objective(w_new, b_new, X, y, hp.C)
            if new_loss <= loss:
                w, b, loss = w_new, b_new, new_loss
                step *= 1.3
                break
            step *= 0.5
        if not np.isfinite(loss):
            raise TrainingError(
                f"SVM objective diverged at epoch {t}; lower lr ({hp.lr}) or C ({hp.C})"
            )
        history.append(loss)

    margins = y * (X @ w + b)
    support = np.flatnonzero(margins <= 1.0 + hp.tol)
    return SvmModel(w, float(b), support, hp, history)


def positive_support_vectors(model: SvmModel, train: Dataset) -> np.ndarray:
    """Minority rows on or inside the margin; never empty.

    Falls back to the few minority rows with the smallest functional margin
    when no row satisfies the margin inequality.
    """
    minority = np.flatnonzero(train.labels == 1)
    if minority.size == 0:
        raise DegenerateDataError("no minority rows present")
    margins = model.decision(train.features[minority])  # y=+1 so margin = decision
    inside = minority[margins <= 1.0 + model.hyperparams.tol]
    if inside.size > 0:
        return inside
    take = min(FALLBACK_SUPPORT_COUNT, minority.size)
    order = np.argsort(margins, kind="stable")[:take]
    return minority[order]
