"""AdamW with decoupled weight decay."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import NumericalError


@dataclass
class AdamWState:
    m: np.ndarray
    v: np.ndarray
    t: int = 0

    @classmethod
    def zeros(cls, n_params: int) -> "AdamWState":
        return cls(m=np.zeros(n_params), v=np.zeros(n_params), t=0)


@dataclass(frozen=True)
class AdamWConfig:
    lr: float = 1e-3
    weight_decay: float = 0.0
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8


def adamw_step(
    params: np.ndarray,
    grads: np.ndarray,
    state: AdamWState,
    config: AdamWConfig,
) -> tuple[np.ndarray, AdamWState]:
    """One update p <- p - lr*(m_hat/(sqrt(v_hat)+eps) + wd*p).

    Weight decay is decoupled: it multiplies the parameter directly and
    never enters the moment estimates. Returns fresh arrays; the inputs
    are not modified.
    """
    if not np.isfinite(grads).all():
        raise NumericalError("non-finite gradient passed to adamw_step")
    t = state.t + 1
    m = config.beta1 * state.m + (1.0 - config.beta1) * grads
    v = config.beta2 * state.v + (1.0 - config.beta2) * grads * grads
    m_hat = m / (1.0 - config.beta1**t)
    v_hat = v / (1.0 - config.beta2**t)
    update = m_hat / (np.sqrt(v_hat) + config.eps) + config.weight_decay * params
    new_params = params - config.lr * update
    return new_params, AdamWState(m=m, v=v, t=t)
