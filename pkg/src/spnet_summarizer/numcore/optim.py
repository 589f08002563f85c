"""Adam optimizer and gradient utilities."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Dict, Mapping, Optional, Tuple

import numpy as np
from numpy.typing import NDArray

from spnet_summarizer.exceptions import DimensionError, OptimizationError
from spnet_summarizer.numcore.tensor import Tensor


@dataclass
class AdamState:
    """Moment estimates and hyperparameters of an Adam run."""

    lr: float = 0.001
    beta1: float = 0.9
    beta2: float = 0.999
    epsilon: float = 1e-8
    t: int = 0
    m: Dict[str, NDArray[Any]] = field(default_factory=dict)
    v: Dict[str, NDArray[Any]] = field(default_factory=dict)

    @classmethod
    def for_params(cls, params: Mapping[str, Tensor], **hyper: Any) -> AdamState:
        """Create a state with zero moments shaped like ``params``."""
        state = cls(**hyper)
        for name, p in params.items():
            state.m[name] = np.zeros_like(p.data)
            state.v[name] = np.zeros_like(p.data)
        return state


def adam_step(
    params: Mapping[str, Tensor], grads: Mapping[str, NDArray[Any]], state: AdamState
) -> Tuple[Mapping[str, Tensor], AdamState]:
    """Apply one bias-corrected Adam update in place.

    Raises:
        OptimizationError: If a gradient contains non-finite values.
        DimensionError: If a gradient or moment does not match its parameter.
    """
    for name, g in grads.items():
        if not np.all(np.isfinite(g)):
            raise OptimizationError(f"Non-finite gradient for parameter '{name}'")

    state.t += 1
    correction1 = 1.0 - state.beta1 ** state.t
    correction2 = 1.0 - state.beta2 ** state.t
    for name, p in params.items():
        g = grads[name]
        if g.shape != p.data.shape:
            raise DimensionError(f"Gradient for '{name}' has shape {g.shape}, parameter {p.shape}")
        m = state.m.setdefault(name, np.zeros_like(p.data))
        v = state.v.setdefault(name, np.zeros_like(p.data))
        if m.shape != p.data.shape:
            raise DimensionError(f"Adam moments for '{name}' do not match the parameter shape")
        m *= state.beta1
        m += (1.0 - state.beta1) * g
        v *= state.beta2
        v += (1.0 - state.beta2) * (g * g)
        m_hat = m / correction1
        v_hat = v / correction2
        update = state.lr * m_hat / (np.sqrt(v_hat) + state.epsilon)
        p.data -= update.astype(p.data.dtype, copy=False)
    return params, state


def clip_grad_norm(grads: Dict[str, NDArray[Any]], max_norm: Optional[float]) -> float:
    """Rescale gradients in place so their global L2 norm is at most ``max_norm``.

    Returns the norm before clipping. ``None`` disables clipping.
    """
    total = float(np.sqrt(sum(float(np.sum(g.astype(np.float64) ** 2)) for g in grads.values())))
    if max_norm is not None and total > max_norm > 0:
        factor = max_norm / (total + 1e-12)
        for name in grads:
            grads[name] = grads[name] * grads[name].dtype.type(factor)
    return total
