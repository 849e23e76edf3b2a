"""K-nearest-neighbors with fully pinned tie handling.

Neighbor order is ascending Euclidean distance with ties broken by the
lower training-row index. Distances use the direct difference expansion
rather than a Gram-matrix identity, so results agree exactly with a
naive exhaustive scan. Predicted distributions are vote fractions; the
label decision breaks vote ties by the smaller summed neighbor distance
and then by the lower label index.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import DimMismatch, KTooLarge, SingleClass

_CHUNK_ROWS = 4_000_000  # cap on len(train) * len(query chunk)


@dataclass
class KnnModel:
    k: int
    X: np.ndarray  # (n, d) float64
    y: np.ndarray  # (n,) int64
    n_classes: int = 3


def train_knn(X: np.ndarray, y: np.ndarray, k: int = 3, n_classes: int = 3) -> KnnModel:
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.int64)
    if k < 1:
        raise ValueError(f"k must be at least 1, got {k}")
    if k > len(X):
        raise KTooLarge(f"k={k} exceeds the {len(X)} training documents")
    if len(np.unique(y)) < 2:
        raise SingleClass("training labels contain a single class")
    return KnnModel(k=k, X=X, y=y, n_classes=n_classes)


def _neighbor_blocks(model: KnnModel, Q: np.ndarray):
    """Yield (query offset, sq_distances block) with direct per-pair arithmetic."""
    Q = np.asarray(Q, dtype=np.float64)
    if Q.ndim == 1:
        Q = Q[None, :]
    if Q.shape[1] != model.X.shape[1]:
        raise DimMismatch(
            f"queries of width {Q.shape[1]} against model of width {model.X.shape[1]}")
    n_train = len(model.X)
    chunk = max(1, _CHUNK_ROWS // max(n_train, 1))
    for start in range(0, len(Q), chunk):
        block = Q[start:start + chunk]
        diff = block[:, None, :] - model.X[None, :, :]
        yield start, np.sum(diff * diff, axis=2)


def _topk(model: KnnModel, sq_dist_row: np.ndarray) -> np.ndarray:
    # primary key: squared distance; secondary: training index. lexsort
    # takes the last key as most significant.
    order = np.lexsort((np.arange(len(sq_dist_row)), sq_dist_row))
    return order[: model.k]


def predict_knn(model: KnnModel, Q: np.ndarray) -> np.ndarray:
    """Vote-fraction distributions, shape (n_queries, n_classes)."""
    single = np.asarray(Q).ndim == 1
    out = np.zeros(((1 if single else len(Q)), model.n_classes), dtype=np.float64)
    for start, sq in _neighbor_blocks(model, Q):
        for i in range(len(sq)):
            nbrs = _topk(model, sq[i])
            votes = np.bincount(model.y[nbrs], minlength=model.n_classes)
            out[start + i] = votes / model.k
    return out[0] if single else out


def predict_knn_labels(model: KnnModel, Q: np.ndarray) -> np.ndarray:
    """Label decisions with the full vote / summed-distance / index tie chain."""
    single = np.asarray(Q).ndim == 1
    out = np.zeros((1 if single else len(Q)), dtype=np.int64)
    for start, sq in _neighbor_blocks(model, Q):
        for i in range(len(sq)):
            nbrs = _topk(model, sq[i])
            votes = np.bincount(model.y[nbrs], minlength=model.n_classes)
            top = votes.max()
            tied = np.flatnonzero(votes == top)
            if len(tied) == 1:
                out[start + i] = tied[0]
                continue
            dist = np.sqrt(sq[i][nbrs])
            sums = np.array([dist[model.y[nbrs] == c].sum() for c in tied])
            out[start + i] = tied[int(np.argmin(sums))]  # argmin is first-wins
    return out[0] if single else out
