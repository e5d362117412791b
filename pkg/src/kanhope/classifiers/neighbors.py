"""K-nearest neighbors with Minkowski-p distance over sparse vectors.

Distances are computed without densifying: per query,

    d(q, x)^p = sum_j |x_j|^p  +  sum_{j in q} (|q_j - x_j|^p - |x_j|^p)

so only the stored columns touched by the query are visited. Uniform
weights; vote ties go to the lowest class index, distance ties to the
lowest stored index.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy import sparse

from ..features import SparseVector, to_csr


@dataclass
class KnnModel:
    stored: sparse.csr_matrix
    stored_labels: np.ndarray
    k: int
    p: float
    classes: np.ndarray
    _csc: sparse.csc_matrix | None = field(default=None, repr=False, compare=False)
    _row_pow: np.ndarray | None = field(default=None, repr=False, compare=False)

    @property
    def n_features(self) -> int:
        return int(self.stored.shape[1])


def fit_knn(
    X: Sequence[SparseVector],
    y: Sequence[int],
    k: int = 3,
    p: float = 2.0,
    n_features: int | None = None,
) -> KnnModel:
    y = np.asarray(y, dtype=np.int64)
    if len(X) != y.size:
        raise ValueError(f"{len(X)} feature vectors but {y.size} labels")
    if not 1 <= k <= len(X):
        raise ValueError(f"k={k} must be in [1, {len(X)}]")
    if p <= 0:
        raise ValueError("Minkowski power must be positive")
    if n_features is None:
        n_features = max((int(v.indices[-1]) + 1 for v in X if len(v)), default=0)
    mat = to_csr(X, n_features)
    return KnnModel(mat, y, k, p, np.unique(y))


def _prepare(model: KnnModel) -> None:
    if model._csc is None:
        model._csc = model.stored.tocsc()
        model._row_pow = np.asarray(
            abs(model.stored).power(model.p).sum(axis=1)
        ).ravel()


def _neighbor_votes(model: KnnModel, query: SparseVector) -> np.ndarray:
    _prepare(model)
    csc = model._csc
    d_pow = model._row_pow.copy()
    for j, qv in zip(query.indices, query.values):
        if j >= model.n_features:
            raise ValueError(f"query feature {int(j)} exceeds model dimension {model.n_features}")
        d_pow += abs(qv) ** model.p
        start, end = csc.indptr[j], csc.indptr[j + 1]
        rows = csc.indices[start:end]
        vals = csc.data[start:end]
        d_pow[rows] += np.abs(qv - vals) ** model.p - np.abs(vals) ** model.p - abs(qv) ** model.p
    np.maximum(d_pow, 0.0, out=d_pow)
    order = np.lexsort((np.arange(d_pow.size), d_pow))[: model.k]
    votes = np.zeros(model.classes.size)
    for cls_index in np.searchsorted(model.classes, model.stored_labels[order]):
        votes[cls_index] += 1
    return votes / model.k


def predict_proba_knn(model: KnnModel, X: Sequence[SparseVector]) -> np.ndarray:
    if not len(X):
        return np.zeros((0, model.classes.size))
    return np.vstack([_neighbor_votes(model, q) for q in X])
