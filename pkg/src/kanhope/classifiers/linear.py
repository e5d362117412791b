"""L2-regularized logistic regression on sparse features.

Minimizes  C * sum_i logloss(sigmoid(w.x_i + b), y_i) + 0.5 * ||w||^2
(bias unregularized) by full-batch gradient descent with Armijo
backtracking, which keeps the objective monotonically non-increasing
and the fit deterministic from zero initialization.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy import sparse

from ..features import SparseVector, to_csr


@dataclass
class LinearModel:
    weights: np.ndarray
    bias: float
    C: float
    train_config: dict = field(default_factory=dict)

    @property
    def n_features(self) -> int:
        return int(self.weights.size)


def _log_loss(z: np.ndarray, y: np.ndarray) -> float:
    # y*softplus(-z) + (1-y)*softplus(z), stable for large |z|
    return float(np.sum(y * np.logaddexp(0.0, -z) + (1.0 - y) * np.logaddexp(0.0, z)))


def _objective(X: sparse.csr_matrix, y: np.ndarray, w: np.ndarray, b: float, C: float) -> float:
    z = X @ w + b
    return C * _log_loss(z, y) + 0.5 * float(w @ w)


def _validate_xy(X: Sequence[SparseVector], y: Sequence[int], n_features: int | None):
    y = np.asarray(y, dtype=np.float64)
    if len(X) != y.size:
        raise ValueError(f"{len(X)} feature vectors but {y.size} labels")
    if y.size < 2:
        raise ValueError("need at least two training examples")
    classes = np.unique(y)
    if not np.all(np.isin(classes, (0.0, 1.0))):
        raise ValueError("labels must be binary 0/1")
    if classes.size < 2:
        raise ValueError("both classes must be present in the training data")
    if n_features is None:
        n_features = max((int(v.indices[-1]) + 1 for v in X if len(v)), default=0)
    mat = to_csr(X, n_features)
    if not np.all(np.isfinite(mat.data)):
        raise ValueError("non-finite feature values")
    return mat, y, n_features


def fit_logreg(
    X: Sequence[SparseVector],
    y: Sequence[int],
    C: float = 0.1,
    n_features: int | None = None,
    tol: float = 1e-4,
    max_iter: int = 1000,
) -> LinearModel:
    mat, y, n_features = _validate_xy(X, y, n_features)
    w = np.zeros(n_features, dtype=np.float64)
    b = 0.0
    objective = _objective(mat, y, w, b, C)
    history = [objective]
    step = 1.0
    for _ in range(max_iter):
        z = mat @ w + b
        p = 1.0 / (1.0 + np.exp(-np.clip(z, -500, 500)))
        residual = p - y
        grad_w = C * (mat.T @ residual) + w
        grad_b = C * float(residual.sum())
        grad_norm_sq = float(grad_w @ grad_w) + grad_b * grad_b
        if np.sqrt(grad_norm_sq) <= tol:
            break
        # Armijo backtracking from a warm-started step size
        step = min(step * 2.0, 1e4)
        while step > 1e-20:
            candidate = _objective(mat, y, w - step * grad_w, b - step * grad_b, C)
            if candidate <= objective - 1e-4 * step * grad_norm_sq:
                break
            step *= 0.5
        w -= step * grad_w
        b -= step * grad_b
        objective = _objective(mat, y, w, b, C)
        history.append(objective)
    return LinearModel(
        weights=w,
        bias=b,
        C=C,
        train_config={
            "tol": tol,
            "max_iter": max_iter,
            "iterations": len(history) - 1,
            "objective_history": history,
        },
    )


def predict_proba_linear(model: LinearModel, X: Sequence[SparseVector]) -> np.ndarray:
    mat = to_csr(X, model.n_features)
    z = mat @ model.weights + model.bias
    p = 1.0 / (1.0 + np.exp(-np.clip(z, -500, 500)))
    return np.column_stack([1.0 - p, p])
