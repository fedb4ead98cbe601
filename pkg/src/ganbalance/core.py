"""Dataset representation, CSV ingestion, min-max scaling, stratified
splitting and seeded randomness shared by every other module.

Randomness is pinned to numpy's PCG64 generator: identical seeds produce
identical streams on every platform. Child seeds for parallel or per-cell
work are derived with ``child_seed`` so that the derivation itself is part
of the reproducibility contract.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError, DegenerateDataError, ParseError

LABEL_COLUMN_NAME = "label"


def make_rng(seed: int) -> np.random.Generator:
    """Seeded generator (PCG64). Same seed, same stream, any platform."""
    return np.random.Generator(np.random.PCG64(seed))


def child_seed(master_seed: int, *key: int) -> int:
    """Derive a deterministic child seed from a master seed and a cell key."""
    ss = np.random.SeedSequence([int(master_seed), *[int(k) for k in key]])
    return int(ss.generate_state(1)[0])


@dataclass(frozen=True)
class Dataset:
    """Immutable feature matrix plus binary labels (1 = minority)."""

    features: np.ndarray  # (n_samples, n_features) float64
    labels: np.ndarray    # (n_samples,) int, values in {0, 1}
    feature_names: list[str] = field(default_factory=list)

    def __post_init__(self):
        feats = np.ascontiguousarray(np.asarray(self.features, dtype=np.float64))
        labs = np.asarray(self.labels, dtype=np.int64)
        if feats.ndim != 2 or feats.shape[1] < 1:
            raise DegenerateDataError("features must be a 2-d matrix with >= 1 column")
        if feats.shape[0] != labs.shape[0]:
            raise DegenerateDataError(
                f"row count mismatch: {feats.shape[0]} feature rows vs {labs.shape[0]} labels"
            )
        if not np.all(np.isfinite(feats)):
            raise DegenerateDataError("features contain NaN or Inf")
        if not np.isin(labs, (0, 1)).all():
            raise DegenerateDataError("labels must be 0 or 1")
        names = list(self.feature_names) or [f"f{j}" for j in range(feats.shape[1])]
        if len(names) != feats.shape[1]:
            raise ConfigError("feature_names length does not match feature count")
        feats.setflags(write=False)
        labs.setflags(write=False)
        object.__setattr__(self, "features", feats)
        object.__setattr__(self, "labels", labs)
        object.__setattr__(self, "feature_names", names)

    @property
    def n_samples(self) -> int:
        return self.features.shape[0]

    @property
    def n_features(self) -> int:
        return self.features.shape[1]

    def class_counts(self) -> tuple[int, int]:
        """(majority count, minority count) i.e. (count of 0s, count of 1s)."""
        ones = int(self.labels.sum())
        return self.n_samples - ones, ones

    def subset(self, indices) -> "Dataset":
        idx = np.asarray(indices, dtype=np.int64)
        return Dataset(self.features[idx], self.labels[idx], self.feature_names)


@dataclass(frozen=True)
class ScalerParams:
    per_feature_min: np.ndarray
    per_feature_max: np.ndarray

    def __post_init__(self):
        lo = np.asarray(self.per_feature_min, dtype=np.float64)
        hi = np.asarray(self.per_feature_max, dtype=np.float64)
        if lo.shape != hi.shape or lo.ndim != 1:
            raise ConfigError("scaler min/max must be 1-d vectors of equal length")
        if np.any(lo > hi):
            raise ConfigError("scaler min exceeds max for some feature")
        object.__setattr__(self, "per_feature_min", lo)
        object.__setattr__(self, "per_feature_max", hi)


@dataclass(frozen=True)
class SplitSpec:
    train_fraction: float = 0.8
    seed: int = 0
    stratified: bool = True

    def __post_init__(self):
        if not 0.0 < self.train_fraction < 1.0:
            raise ConfigError("train_fraction must be in (0, 1)")


def _parse_cell(token: str, line_no: int, col: int) -> float:
    try:
        return float(token)
    except ValueError:
        raise ParseError(
            f"non-numeric feature value {token!r} at line {line_no}, column {col + 1}"
        ) from None


def load_csv(path, label_column, minority_label) -> Dataset:
    """Load a comma-separated table with one label column.

    ``label_column`` is a header name or a 0-based column index.
    Raw labels equal to ``minority_label`` map to 1, everything else to 0,
    so multi-class sources collapse to one-vs-rest. Row order is preserved.
    """
    with open(path, newline="") as fh:
        rows = [row for row in csv.reader(fh) if row]
    if not rows:
        raise ParseError(f"{path}: empty file")

    # Optional header: a first row counts as a header when some column is
    # non-numeric there but numeric in the next row (plain non-numeric label
    # columns stay non-numeric all the way down and are not headers).
    header = None
    first = rows[0]
    if len(rows) > 1:
        second = rows[1]
        is_header = any(
            not _is_number(a) and c < len(second) and _is_number(second[c])
            for c, a in enumerate(first)
        )
    else:
        is_header = any(not _is_number(tok) for tok in first)
    if is_header:
        header = [tok.strip() for tok in first]
        rows = rows[1:]
        if not rows:
            raise ParseError(f"{path}: header but no data rows")

    arity = len(first)
    for i, row in enumerate(rows):
        line_no = i + (2 if header else 1)
        if len(row) != arity:
            raise ParseError(
                f"{path}: ragged row at line {line_no} "
                f"({len(row)} fields, expected {arity})"
            )

    if isinstance(label_column, int):
        label_idx = label_column if label_column >= 0 else arity + label_column
        if not 0 <= label_idx < arity:
            raise ConfigError(f"label column index {label_column} out of range")
    else:
        if header is None:
            raise ConfigError(
                f"label column {label_column!r} given by name but file has no header"
            )
        try:
            label_idx = header.index(label_column)
        except ValueError:
            raise ConfigError(
                f"label column {label_column!r} not found in header {header}"
            ) from None

    n = len(rows)
    feats = np.empty((n, arity - 1), dtype=np.float64)
    labels = np.empty(n, dtype=np.int64)
    minority_str = str(minority_label).strip()
    for i, row in enumerate(rows):
        line_no = i + (2 if header else 1)
        raw_label = row[label_idx].strip()
        labels[i] = 1 if _label_matches(raw_label, minority_str) else 0
        j = 0
        for col, tok in enumerate(row):
            if col == label_idx:
                continue
            feats[i, j] = _parse_cell(tok.strip(), line_no, col)
            j += 1
    if not np.all(np.isfinite(feats)):
        raise ParseError(f"{path}: non-finite feature value")

    names = (
        [h for c, h in enumerate(header) if c != label_idx]
        if header
        else [f"f{j}" for j in range(arity - 1)]
    )
    minor = int(labels.sum())
    major = n - minor
    if minor < 2 or major < 2:
        raise DegenerateDataError(
            f"{path}: need >= 2 samples per class, got minority={minor} majority={major}"
        )
    if minor > major:
        raise ConfigError(
            f"minority_label {minority_label!r} selects the larger class "
            f"({minor} > {major}); pick the smaller one"
        )
    return Dataset(feats, labels, names)


def _is_number(tok: str) -> bool:
    try:
        float(tok)
        return True
    except ValueError:
        return False


def _label_matches(raw: str, minority_str: str) -> bool:
    if raw == minority_str:
        return True
    if _is_number(raw) and _is_number(minority_str):
        return float(raw) == float(minority_str)
    return False


def save_csv(ds: Dataset, path, header: bool = True) -> None:
    """Write a Dataset in the same CSV dialect, label column last."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        if header:
            writer.writerow(ds.feature_names + [LABEL_COLUMN_NAME])
        for i in range(ds.n_samples):
            writer.writerow([repr(float(v)) for v in ds.features[i]] + [int(ds.labels[i])])


def minmax_fit(ds: Dataset) -> ScalerParams:
    """Per-feature min/max; fit on the training split only."""
    return ScalerParams(ds.features.min(axis=0), ds.features.max(axis=0))


def minmax_apply(ds: Dataset, params: ScalerParams, target_range=(0.0, 1.0)) -> Dataset:
    lo, hi = float(target_range[0]), float(target_range[1])
    span = params.per_feature_max - params.per_feature_min
    scaled = np.empty_like(ds.features)
    const = span == 0.0
    nz = ~const
    scaled[:, nz] = lo + (hi - lo) * (
        ds.features[:, nz] - params.per_feature_min[nz]
    ) / span[nz]
    scaled[:, const] = 0.5 * (lo + hi)  # constant feature maps to midpoint
    return Dataset(scaled, ds.labels, ds.feature_names)


def minmax_invert(ds: Dataset, params: ScalerParams, target_range=(0.0, 1.0)) -> Dataset:
    lo, hi = float(target_range[0]), float(target_range[1])
    span = params.per_feature_max - params.per_feature_min
    raw = np.empty_like(ds.features)
    const = span == 0.0
    nz = ~const
    raw[:, nz] = params.per_feature_min[nz] + (ds.features[:, nz] - lo) * span[nz] / (hi - lo)
    raw[:, const] = params.per_feature_min[const]
    return Dataset(raw, ds.labels, ds.feature_names)


def train_test_split(ds: Dataset, spec: SplitSpec) -> tuple[Dataset, Dataset]:
    """Deterministic stratified split.

    Per class, the train side takes floor(train_fraction * class_count)
    rows (that rounding rule is the contract); indices are then sorted so
    each side preserves the original row order.
    """
    major, minor = ds.class_counts()
    if minor < 2 or major < 2:
        raise DegenerateDataError(
            f"need >= 2 samples per class to split, got minority={minor} majority={major}"
        )
    rng = make_rng(spec.seed)
    train_idx, test_idx = [], []
    if spec.stratified:
        groups = [np.flatnonzero(ds.labels == c) for c in (0, 1)]
    else:
        groups = [np.arange(ds.n_samples)]
    for idx in groups:
        perm = rng.permutation(idx)
        n_train = int(np.floor(spec.train_fraction * len(idx)))
        n_train = min(max(n_train, 1), len(idx) - 1)  # both sides non-empty per group
        train_idx.append(perm[:n_train])
        test_idx.append(perm[n_train:])
    train_idx = np.sort(np.concatenate(train_idx))
    test_idx = np.sort(np.concatenate(test_idx))
    return ds.subset(train_idx), ds.subset(test_idx)


def class_partition(ds: Dataset) -> tuple[np.ndarray, np.ndarray]:
    """(minority row indices, majority row indices); disjoint, covering."""
    return np.flatnonzero(ds.labels == 1), np.flatnonzero(ds.labels == 0)
