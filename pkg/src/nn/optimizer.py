"""
Adam optimizer
Pure bias-corrected Adam update over a flat list of parameter arrays.
"""

from dataclasses import dataclass, replace
from typing import List, Sequence, Tuple

import numpy as np

from src.utils.errors import DimensionError


@dataclass(frozen=True, eq=False)
class AdamState:
    first_moment: Tuple[np.ndarray, ...]
    second_moment: Tuple[np.ndarray, ...]
    step: int = 0
    lr: float = 1e-3
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8


def init_adam(arrays: Sequence[np.ndarray], lr: float = 1e-3, beta1: float = 0.9,
              beta2: float = 0.999, eps: float = 1e-8) -> AdamState:
    """Zero moments shaped like the parameters"""
    zeros = tuple(np.zeros_like(a, dtype=np.float64) for a in arrays)
    return AdamState(first_moment=zeros, second_moment=tuple(z.copy() for z in zeros),
                     step=0, lr=lr, beta1=beta1, beta2=beta2, eps=eps)


def adam_step(
    arrays: Sequence[np.ndarray], grads: Sequence[np.ndarray], state: AdamState
) -> Tuple[List[np.ndarray], AdamState]:
    """
    One Adam update

    Args:
        arrays: Current parameters
        grads: Gradients, same shapes
        state: Optimizer state

    Returns:
        (new parameters, new state); inputs are not modified

    Raises:
        DimensionError: On any shape mismatch
    """
    if not (len(arrays) == len(grads) == len(state.first_moment)):
        raise DimensionError("parameter, gradient and moment counts differ")
    step = state.step + 1
    b1, b2 = state.beta1, state.beta2
    correction1 = 1.0 - b1 ** step
    correction2 = 1.0 - b2 ** step

    new_arrays, new_m, new_v = [], [], []
    for p, g, m, v in zip(arrays, grads, state.first_moment, state.second_moment):
        g = np.asarray(g, dtype=np.float64)
        if p.shape != g.shape or m.shape != g.shape:
            raise DimensionError(f"gradient shape {g.shape} does not match parameter shape {p.shape}")
        m_next = b1 * m + (1.0 - b1) * g
        v_next = b2 * v + (1.0 - b2) * g * g
        m_hat = m_next / correction1
        v_hat = v_next / correction2
        new_arrays.append(p - state.lr * m_hat / (np.sqrt(v_hat) + state.eps))
        new_m.append(m_next)
        new_v.append(v_next)

    return new_arrays, replace(state, first_moment=tuple(new_m), second_moment=tuple(new_v), step=step)
