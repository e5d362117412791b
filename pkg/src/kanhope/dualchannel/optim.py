"""Adam with decoupled weight decay.

The decay term is applied outside the adaptive update:

    theta <- theta - lr * m_hat / (sqrt(v_hat) + eps) - lr * wd * theta
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


@dataclass
class AdamWState:
    m: dict[str, np.ndarray] = field(default_factory=dict)
    v: dict[str, np.ndarray] = field(default_factory=dict)
    step: int = 0


def init_state(params: dict[str, np.ndarray]) -> AdamWState:
    return AdamWState(
        m={name: np.zeros_like(arr) for name, arr in params.items()},
        v={name: np.zeros_like(arr) for name, arr in params.items()},
    )


def adamw_step(
    params: dict[str, np.ndarray],
    grads: dict[str, np.ndarray],
    state: AdamWState,
    lr: float,
    weight_decay: float = 0.0,
    betas: tuple[float, float] = (0.9, 0.999),
    eps: float = 1e-8,
) -> tuple[dict[str, np.ndarray], AdamWState]:
    """One update over every named parameter, in place. Bias-corrected moments."""
    beta1, beta2 = betas
    state.step += 1
    bc1 = 1.0 - beta1**state.step
    bc2 = 1.0 - beta2**state.step
    for name, param in params.items():
        grad = np.asarray(grads[name], dtype=np.float64)
        if grad.shape != param.shape:
            raise ValueError(f"gradient shape {grad.shape} != parameter shape {param.shape} for {name!r}")
        if not np.all(np.isfinite(grad)):
            raise FloatingPointError(f"non-finite gradient for parameter {name!r}")
        m = state.m[name]
        v = state.v[name]
        m *= beta1
        m += (1.0 - beta1) * grad
        v *= beta2
        v += (1.0 - beta2) * grad**2
        update = lr * (m / bc1) / (np.sqrt(v / bc2) + eps)
        param -= update
        if weight_decay:
            param -= lr * weight_decay * param
    return params, state
