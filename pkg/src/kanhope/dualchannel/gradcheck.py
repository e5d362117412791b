"""Finite-difference verification of the dual-channel gradients.

Central differences of the mean BCE with dropout disabled, in double
precision. Embedding rows untouched by the batch have exactly zero
gradient on both sides; those comparisons resolve to zero instead of
dividing by zero.
"""

from __future__ import annotations

from typing import Sequence

import numpy as np

from . import model as dc
from .train import Example, forward_examples

_ZERO_TOL = 1e-12


def _mean_bce(model: dc.DualChannelModel, batch: Sequence[Example]) -> float:
    p, _ = forward_examples(model, batch, training=False)
    y = np.array([e.label for e in batch], dtype=np.float64)
    return dc.batch_loss(p, y)


def _relative_error(analytic: float, numeric: float) -> float:
    scale = max(abs(analytic), abs(numeric))
    if scale < _ZERO_TOL:
        return 0.0
    return abs(analytic - numeric) / scale


def _touched_rows(batch: Sequence[Example], channel: str, vocab_size: int) -> np.ndarray:
    ids = [getattr(e, f"ids_{channel}") for e in batch]
    touched = np.unique(np.concatenate([i for i in ids if len(i)] or [np.zeros(0, np.int64)]))
    # include one untouched row, if any, to exercise the zero-vs-zero path
    untouched = np.setdiff1d(np.arange(vocab_size), touched)
    if untouched.size:
        touched = np.append(touched, untouched[0])
    return touched.astype(np.int64)


def grad_check(
    model: dc.DualChannelModel,
    batch: Sequence[Example],
    epsilon: float = 1e-5,
) -> float:
    """Max relative error between analytic and central-difference gradients."""
    if not batch:
        raise ValueError("grad_check needs a non-empty batch")
    y = np.array([e.label for e in batch], dtype=np.float64)
    _, cache = forward_examples(model, batch, training=False)
    analytic = dc.backward_batch(model, cache, y)

    params = model.params()
    worst = 0.0
    for name, param in params.items():
        if name.startswith("emb_"):
            rows = _touched_rows(batch, name.split("_")[1], param.shape[0])
            positions = [(int(r), c) for r in rows for c in range(param.shape[1])]
        else:
            positions = list(np.ndindex(param.shape))
        grad = analytic[name]
        for pos in positions:
            original = param[pos]
            param[pos] = original + epsilon
            upper = _mean_bce(model, batch)
            param[pos] = original - epsilon
            lower = _mean_bce(model, batch)
            param[pos] = original
            numeric = (upper - lower) / (2.0 * epsilon)
            worst = max(worst, _relative_error(float(np.asarray(grad)[pos]), numeric))
    return worst
