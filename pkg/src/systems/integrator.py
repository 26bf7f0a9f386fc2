"""
Fixed-step integrator
Classical fourth-order Runge-Kutta used for dataset generation, field
rollouts and every analysis that integrates a vector field.
"""

import logging
from typing import Callable, Tuple

import numpy as np

from src.utils.errors import ConfigurationError, IntegrationDivergenceError

logger = logging.getLogger(__name__)

VectorFunction = Callable[[np.ndarray], np.ndarray]


def rk4_step(f: VectorFunction, y: np.ndarray, h: float) -> np.ndarray:
    """One RK4 step of size h"""
    k1 = f(y)
    k2 = f(y + 0.5 * h * k1)
    k3 = f(y + 0.5 * h * k2)
    k4 = f(y + h * k3)
    return y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def _check_grid(dt: float, n_steps: int, substeps: int) -> None:
    if not dt > 0:
        raise ConfigurationError(f"dt must be positive, got {dt}", field="dt")
    if n_steps < 1:
        raise ConfigurationError(f"n_steps must be >= 1, got {n_steps}", field="n_steps")
    if substeps < 1:
        raise ConfigurationError(f"substeps must be >= 1, got {substeps}", field="substeps")


def integrate_fixed_step(
    f: VectorFunction,
    y0: np.ndarray,
    dt: float,
    n_steps: int,
    substeps: int = 1,
) -> np.ndarray:
    """
    Integrate dy/dt = f(y) and sample every dt

    Args:
        f: Vector function accepting (..., d) arrays
        y0: Initial state, shape (d,) or (m, d)
        dt: Output sampling interval
        n_steps: Number of output samples, including y0
        substeps: RK4 steps per output interval

    Returns:
        Samples of shape (n_steps, d) or (m, n_steps, d)

    Raises:
        IntegrationDivergenceError: On the first non-finite sample
    """
    _check_grid(dt, n_steps, substeps)
    y = np.array(y0, dtype=np.float64)
    h = dt / substeps
    out = np.empty((n_steps,) + y.shape)
    out[0] = y
    for i in range(1, n_steps):
        for _ in range(substeps):
            y = rk4_step(f, y, h)
        if not np.all(np.isfinite(y)):
            logger.error(f"Integration diverged at step {i}")
            raise IntegrationDivergenceError(f"non-finite state at step {i}", step_index=i)
        out[i] = y
    return out if y.ndim == 1 else np.swapaxes(out, 0, 1)


def integrate_batch_masked(
    f: VectorFunction,
    y0: np.ndarray,
    dt: float,
    n_steps: int,
    substeps: int = 1,
) -> Tuple[np.ndarray, np.ndarray]:
    """
    Integrate many initial states, tolerating divergence of individual rows

    Rows that become non-finite are frozen and reported as NaN from the step
    they diverged on.

    Args:
        f: Vector function accepting (m, d) arrays
        y0: Initial states, shape (m, d)
        dt: Output sampling interval
        n_steps: Samples per row, including y0
        substeps: RK4 steps per output interval

    Returns:
        (samples of shape (m, n_steps, d), diverged mask of shape (m,))
    """
    _check_grid(dt, n_steps, substeps)
    y = np.array(y0, dtype=np.float64)
    h = dt / substeps
    out = np.empty((y.shape[0], n_steps, y.shape[1]))
    out[:, 0] = y
    diverged = ~np.all(np.isfinite(y), axis=1)
    y[diverged] = 0.0
    with np.errstate(over="ignore", invalid="ignore"):
        for i in range(1, n_steps):
            for _ in range(substeps):
                y = rk4_step(f, y, h)
            bad = ~np.all(np.isfinite(y), axis=1) & ~diverged
            if np.any(bad):
                logger.debug(f"{int(bad.sum())} rollouts diverged at step {i}")
                diverged |= bad
            y[diverged] = 0.0
            out[:, i] = y
            out[diverged, i] = np.nan
    return out, diverged
