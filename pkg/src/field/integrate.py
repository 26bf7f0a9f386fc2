"""
Field integration
RK4 rollouts of a vector field, and reverse-mode gradients through unrolled
RK4 steps of a FieldModel.
"""

from dataclasses import dataclass
from typing import Any, Dict, List, Optional, Tuple

import numpy as np

from src.embed.model import NsvTrajectory
from src.nn.mlp import ForwardCache, backward, forward
from src.systems.integrator import integrate_batch_masked, integrate_fixed_step
from src.utils.errors import ConfigurationError, DimensionError, IntegrationDivergenceError
from .model import FieldLike, FieldModel, as_callable


def integrate(
    field: FieldLike,
    v0: np.ndarray,
    dt: float,
    n_steps: int,
    substeps: int = 1,
    provenance: Optional[Dict[str, Any]] = None,
) -> NsvTrajectory:
    """
    Integrate dV/dt = F(V) from V0

    Args:
        field: FieldModel or a callable accepting (n, d) arrays
        v0: Initial state (d,)
        dt: Output sampling interval
        n_steps: Samples including V0
        substeps: RK4 steps per interval
        provenance: Recorded on the trajectory

    Returns:
        NsvTrajectory of n_steps samples

    Raises:
        IntegrationDivergenceError: With the index of the first non-finite sample
    """
    start = np.asarray(v0, dtype=np.float64)
    if start.ndim != 1:
        raise DimensionError(f"V0 must be a vector, got shape {start.shape}")
    f = as_callable(field)
    states = integrate_fixed_step(lambda v: f(np.atleast_2d(v)).reshape(v.shape), start, dt, n_steps, substeps)
    return NsvTrajectory(states=states, dt=dt, provenance=dict(provenance or {}))


def integrate_many(
    field: FieldLike, v0: np.ndarray, dt: float, n_steps: int, substeps: int = 1
) -> Tuple[np.ndarray, np.ndarray]:
    """Batched rollouts; diverged rows come back as NaN with a mask"""
    starts = np.asarray(v0, dtype=np.float64)
    if starts.ndim != 2:
        raise DimensionError(f"initial states must be (m, d), got shape {starts.shape}")
    return integrate_batch_masked(as_callable(field), starts, dt, n_steps, substeps)


# ============================================================================
# Differentiable rollouts
# ============================================================================

@dataclass(frozen=True, eq=False)
class RolloutTape:
    """Forward caches of every RK4 stage, in execution order"""

    stages: Tuple[Tuple[ForwardCache, ForwardCache, ForwardCache, ForwardCache], ...]
    h: float
    substeps: int
    n_steps: int


def rollout_with_tape(
    model: FieldModel, v0: np.ndarray, dt: float, n_steps: int, substeps: int = 1
) -> Tuple[np.ndarray, RolloutTape]:
    """
    Batched RK4 rollout that records what the reverse pass needs

    Args:
        model: Field network
        v0: Initial states (m, d)
        dt: Sampling interval
        n_steps: Samples per row including V0
        substeps: RK4 steps per interval

    Returns:
        (states of shape (m, n_steps, d), tape)
    """
    if not dt > 0 or substeps < 1 or n_steps < 1:
        raise ConfigurationError("rollout needs dt > 0, substeps >= 1 and n_steps >= 1")
    params = model.params
    y = np.array(v0, dtype=np.float64)
    h = dt / substeps
    out = np.empty((y.shape[0], n_steps, y.shape[1]))
    out[:, 0] = y
    stages = []
    for i in range(1, n_steps):
        for _ in range(substeps):
            k1, c1 = forward(params, y)
            k2, c2 = forward(params, y + 0.5 * h * k1)
            k3, c3 = forward(params, y + 0.5 * h * k2)
            k4, c4 = forward(params, y + h * k3)
            y = y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
            stages.append((c1, c2, c3, c4))
        if not np.all(np.isfinite(y)):
            raise IntegrationDivergenceError(f"non-finite state at step {i}", step_index=i)
        out[:, i] = y
    return out, RolloutTape(stages=tuple(stages), h=h, substeps=substeps, n_steps=n_steps)


def rollout_backward(
    model: FieldModel, tape: RolloutTape, grad_states: np.ndarray
) -> Tuple[List[np.ndarray], np.ndarray]:
    """
    Gradients of sum(grad_states * states) through the recorded rollout

    Args:
        model: The model the tape was recorded with
        tape: From rollout_with_tape
        grad_states: Gradient with respect to the returned states, (m, n_steps, d)

    Returns:
        (parameter gradients in arrays() order, gradient with respect to V0)
    """
    params = model.params
    h = tape.h
    grads = [np.zeros_like(a) for a in params.arrays()]
    g_y = np.array(grad_states[:, tape.n_steps - 1], dtype=np.float64)
    stage_idx = len(tape.stages) - 1

    def accumulate(cache: ForwardCache, g_out: np.ndarray) -> np.ndarray:
        p_grads, g_in = backward(params, cache, g_out)
        for acc, g in zip(grads, p_grads):
            acc += g
        return g_in

    for i in range(tape.n_steps - 1, 0, -1):
        for _ in range(tape.substeps):
            c1, c2, c3, c4 = tape.stages[stage_idx]
            stage_idx -= 1
            g_k1 = (h / 6.0) * g_y
            g_k2 = (h / 3.0) * g_y
            g_k3 = (h / 3.0) * g_y
            g_k4 = (h / 6.0) * g_y
            g_prev = g_y.copy()

            g_y4 = accumulate(c4, g_k4)
            g_prev += g_y4
            g_k3 = g_k3 + h * g_y4

            g_y3 = accumulate(c3, g_k3)
            g_prev += g_y3
            g_k2 = g_k2 + 0.5 * h * g_y3

            g_y2 = accumulate(c2, g_k2)
            g_prev += g_y2
            g_k1 = g_k1 + 0.5 * h * g_y2

            g_prev += accumulate(c1, g_k1)
            g_y = g_prev
        g_y = g_y + grad_states[:, i - 1]
    return grads, g_y
