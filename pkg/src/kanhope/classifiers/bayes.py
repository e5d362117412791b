"""Multinomial naive Bayes with Laplace smoothing on nonnegative features.

    feature_log_prob[c][j] = ln((count_cj + alpha) / (count_c + alpha * V))

where count_cj sums the (possibly fractional) feature weights of class c.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.special import logsumexp

from ..features import SparseVector, to_csr


@dataclass
class NBModel:
    class_log_prior: np.ndarray
    feature_log_prob: np.ndarray
    alpha: float
    classes: np.ndarray

    @property
    def n_features(self) -> int:
        return int(self.feature_log_prob.shape[1])


def fit_nb(
    X: Sequence[SparseVector],
    y: Sequence[int],
    alpha: float = 1.0,
    n_features: int | None = None,
) -> NBModel:
    if alpha <= 0:
        raise ValueError("alpha must be positive")
    y = np.asarray(y, dtype=np.int64)
    if len(X) != y.size:
        raise ValueError(f"{len(X)} feature vectors but {y.size} labels")
    for v in X:
        if np.any(v.values < 0):
            raise ValueError("multinomial NB requires nonnegative features")
    if n_features is None:
        n_features = max((int(v.indices[-1]) + 1 for v in X if len(v)), default=0)
    mat = to_csr(X, n_features)
    classes = np.unique(y)
    k = classes.size
    counts = np.zeros((k, n_features), dtype=np.float64)
    priors = np.zeros(k, dtype=np.float64)
    for ci, cls in enumerate(classes):
        mask = y == cls
        priors[ci] = mask.sum() / y.size
        counts[ci] = np.asarray(mat[np.flatnonzero(mask)].sum(axis=0)).ravel()
    smoothed = counts + alpha
    feature_log_prob = np.log(smoothed) - np.log(smoothed.sum(axis=1, keepdims=True))
    return NBModel(np.log(priors), feature_log_prob, alpha, classes)


def predict_proba_nb(model: NBModel, X: Sequence[SparseVector]) -> np.ndarray:
    mat = to_csr(X, model.n_features)
    joint = mat @ model.feature_log_prob.T + model.class_log_prior
    return np.exp(joint - logsumexp(joint, axis=1, keepdims=True))
