"""
Trajectories
State-level time series and their simulation.
"""

import logging
from dataclasses import dataclass, field
from typing import Any, Dict

import numpy as np
from pydantic import BaseModel

from src.utils.errors import ConfigurationError, DimensionError
from .dynamics import get_system, make_deriv
from .integrator import integrate_fixed_step

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class Trajectory:
    """Uniformly sampled ground-truth states"""

    states: np.ndarray
    dt: float
    system: str
    seed: int
    params: Dict[str, Any] = field(default_factory=dict)
    t0: float = 0.0

    def __post_init__(self) -> None:
        if self.states.ndim != 2 or self.states.shape[0] < 2:
            raise DimensionError(f"trajectory needs shape (n>=2, d), got {self.states.shape}")
        if not self.dt > 0:
            raise ConfigurationError("trajectory dt must be positive", field="dt")

    @property
    def times(self) -> np.ndarray:
        return self.t0 + self.dt * np.arange(self.states.shape[0])

    def __len__(self) -> int:
        return self.states.shape[0]


def simulate(
    system: str,
    params: BaseModel,
    initial: Any,
    dt: float,
    n_steps: int,
    substeps: int = 10,
    seed: int = 0,
) -> Trajectory:
    """
    Simulate a ground-truth system with fixed-step RK4

    Args:
        system: System name
        params: Its parameter model
        initial: Initial state
        dt: Sampling interval
        n_steps: Number of samples, including the initial state (>= 2)
        substeps: Internal RK4 steps per sample
        seed: Seed recorded on the trajectory

    Returns:
        Trajectory of n_steps samples

    Raises:
        IntegrationDivergenceError: If the state becomes non-finite
    """
    spec = get_system(system)
    y0 = np.asarray(initial, dtype=np.float64)
    if y0.shape != (spec.state_dim,):
        raise DimensionError(f"{system} state must have length {spec.state_dim}, got shape {y0.shape}")
    if n_steps < 2:
        raise ConfigurationError(f"n_steps must be >= 2, got {n_steps}", field="n_steps")

    states = integrate_fixed_step(make_deriv(system, params), y0, dt, n_steps, substeps)
    return Trajectory(states=states, dt=dt, system=system, seed=seed, params=params.model_dump())
