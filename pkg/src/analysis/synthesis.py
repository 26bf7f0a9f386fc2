"""
Damped synthesis
Adds a restoring force -gamma (V - V_eq) to a field and integrates it to
produce new dissipative dynamics, at any output frame rate.
"""

import logging
from typing import Callable, Dict, Sequence

import numpy as np

from src.systems.integrator import integrate_batch_masked
from src.utils.errors import ConfigurationError, DimensionError
from .linearization import jacobian_at
from .reports import SynthesisReport

logger = logging.getLogger(__name__)


class DampedField:
    """F(V) - gamma (V - V_eq)"""

    def __init__(self, field: Callable[[np.ndarray], np.ndarray], v_eq: np.ndarray, gamma: float):
        self.field = field
        self.v_eq = np.asarray(v_eq, dtype=np.float64)
        self.gamma = float(gamma)

    def __call__(self, v: np.ndarray) -> np.ndarray:
        arr = np.asarray(v, dtype=np.float64)
        return np.asarray(self.field(arr)) - self.gamma * (arr - self.v_eq)

    def jacobian(self, v: np.ndarray) -> np.ndarray:
        return jacobian_at(self.field, v) - self.gamma * np.eye(self.v_eq.shape[0])


def damped_field(field: Callable, v_eq: np.ndarray, gamma: float) -> DampedField:
    if gamma < 0:
        raise ConfigurationError(f"damping factor must be >= 0, got {gamma}", field="analysis.gammas")
    return DampedField(field, v_eq, gamma)


def synthesize(
    field: Callable,
    v_eq: np.ndarray,
    initial_states: np.ndarray,
    gammas: Sequence[float],
    dt: float,
    n_steps: int,
    substeps: int = 1,
) -> Dict[float, np.ndarray]:
    """
    Rollouts of the damped field for every gamma

    Args:
        field: Learned field
        v_eq: Equilibrium the damping pulls towards
        initial_states: (m, d) starts
        gammas: Damping factors; 0 reproduces the undamped field
        dt: Output sampling interval, independent of the training dt
        n_steps: Samples per rollout
        substeps: RK4 steps per interval

    Returns:
        gamma -> (m, n_steps, d) array, NaN rows for diverged rollouts
    """
    starts = np.asarray(initial_states, dtype=np.float64)
    if starts.ndim != 2 or starts.shape[1] != np.asarray(v_eq).shape[0]:
        raise DimensionError("initial states must be (m, d) matching V_eq")
    out = {}
    for gamma in gammas:
        states, diverged = integrate_batch_masked(damped_field(field, v_eq, gamma), starts, dt, n_steps, substeps)
        if np.any(diverged):
            logger.warning(f"gamma={gamma}: {int(diverged.sum())} rollouts diverged")
        out[float(gamma)] = states
    return out


def synthesis_report(
    rollouts: Dict[float, np.ndarray], v_eq: np.ndarray, dt: float, scale: np.ndarray
) -> SynthesisReport:
    """Mean terminal range-scaled distance to V_eq per gamma, and whether it never grows with gamma"""
    center = np.asarray(v_eq, dtype=np.float64)
    terminal, diverged = {}, {}
    for gamma, states in rollouts.items():
        dist = np.linalg.norm((states[:, -1] - center) / scale, axis=-1)
        ok = np.isfinite(dist)
        terminal[repr(gamma)] = float(dist[ok].mean()) if np.any(ok) else None
        diverged[repr(gamma)] = int((~ok).sum())
    ordered = [terminal[repr(g)] for g in sorted(rollouts)]
    finite = [v for v in ordered if v is not None]
    monotone = len(finite) == len(ordered) and all(b <= a + 1e-12 for a, b in zip(finite, finite[1:]))
    first = next(iter(rollouts.values()))
    return SynthesisReport(
        gammas=sorted(rollouts),
        dt=dt,
        n_steps=first.shape[1],
        n_initial=first.shape[0],
        terminal_distance=terminal,
        diverged=diverged,
        monotone=monotone,
    )


def near_equilibrium_rollouts(
    field: Callable,
    v_eq: np.ndarray,
    scale: np.ndarray,
    delta: float = 0.01,
    count: int = 6,
    n_steps: int = 120,
    dt: float = 1.0 / 60.0,
    substeps: int = 1,
) -> np.ndarray:
    """
    Rollouts from count states evenly spaced on a circle of range-scaled
    radius delta around V_eq, in the plane of its first two coordinates

    Returns:
        (count, n_steps, d) array
    """
    center = np.asarray(v_eq, dtype=np.float64)
    d = center.shape[0]
    angles = 2.0 * np.pi * np.arange(count) / count
    offsets = np.zeros((count, d))
    offsets[:, 0] = np.cos(angles)
    if d > 1:
        offsets[:, 1] = np.sin(angles)
    else:
        offsets[:, 0] = np.where(np.arange(count) % 2 == 0, 1.0, -1.0)
    starts = center + delta * offsets * np.asarray(scale, dtype=np.float64)
    states, _ = integrate_batch_masked(field, starts, dt, n_steps, substeps)
    return states
