"""Exact k-nearest-neighbour queries (Euclidean, deterministic ties).

Brute force on purpose: the pools here are minority classes of desk-scale
datasets, so an index structure buys nothing and costs determinism.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ParameterError


@dataclass(frozen=True)
class NeighborList:
    query_index: int | None
    neighbor_indices: np.ndarray  # (k,) row ids into the pool
    distances: np.ndarray         # (k,) ascending


def knn(query, pool, k: int, exclude: int | None = None) -> NeighborList:
    """k rows of ``pool`` closest to ``query`` in Euclidean distance.

    ``exclude`` drops one row id (the query itself when it is a pool
    member). Ties break toward the lower row index.
    """
    pool = np.asarray(pool, dtype=np.float64)
    query = np.asarray(query, dtype=np.float64)
    eligible = pool.shape[0] - (1 if exclude is not None else 0)
    if k < 1 or k > eligible:
        raise ParameterError(f"k={k} outside [1, {eligible}] eligible pool rows")
    d = np.sqrt(((pool - query) ** 2).sum(axis=1))
    if exclude is not None:
        d = d.copy()
        d[exclude] = np.inf
    order = np.argsort(d, kind="stable")[:k]  # stable sort = lower-index tie rule
    return NeighborList(exclude, order, d[order])
