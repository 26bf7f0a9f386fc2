"""
Lyapunov stability check
Perturbs an equilibrium along random directions at a ladder of radii and
certifies each epsilon when small enough perturbations stay within it.
"""

import logging
import math
from typing import Callable, Optional, Sequence

import numpy as np

from src.systems.integrator import integrate_batch_masked
from src.utils.errors import ConfigurationError, DimensionError
from src.utils.helpers import make_rng
from .reports import StabilityResult

logger = logging.getLogger(__name__)


def data_range(states: np.ndarray) -> np.ndarray:
    """Per-dimension max - min, with 1 in place of a zero range"""
    arr = np.asarray(states, dtype=np.float64).reshape(-1, np.shape(states)[-1])
    spread = arr.max(axis=0) - arr.min(axis=0)
    return np.where(spread > 0, spread, 1.0)


def random_directions(rng: np.random.Generator, n: int, d: int) -> np.ndarray:
    raw = rng.standard_normal((n, d))
    return raw / np.linalg.norm(raw, axis=1, keepdims=True)


def certified_radius(d_ini: np.ndarray, d_max: np.ndarray, epsilon: float) -> Optional[float]:
    """
    Largest initial distance d* such that every sample with d_ini <= d*
    stays below epsilon, or None when the smallest radius already fails
    """
    best = None
    for r in np.unique(d_ini):
        if np.all(d_max[d_ini <= r] < epsilon):
            best = float(r)
        else:
            break
    return best


def check_stability(
    field: Callable[[np.ndarray], np.ndarray],
    v_eq: np.ndarray,
    scale: np.ndarray,
    dt: float,
    epsilons: Sequence[float] = (0.005, 0.01, 0.03, 0.05, 0.1),
    n_directions: int = 10,
    n_radii: int = 10,
    horizon: int = 300,
    substeps: int = 1,
    require_half_radii: bool = True,
    seed: int = 0,
) -> StabilityResult:
    """
    Check Lyapunov stability of an equilibrium

    Distances are Euclidean after dividing each coordinate by ``scale``.
    For each epsilon, n_directions random unit directions are combined with
    radii j * epsilon / n_radii; every perturbed state is integrated for
    horizon samples. Epsilon passes when some d* certifies every sample at
    or below it. With require_half_radii, d* must also cover at least half
    of the radius ladder.

    Args:
        field: Callable on (n, d) arrays
        v_eq: Equilibrium (d,)
        scale: Per-dimension data range
        dt: Sampling interval
        epsilons: Radii as fractions of the range
        n_directions: Directions per radius
        n_radii: Radii per epsilon
        horizon: Samples per rollout, including the start
        substeps: RK4 steps per interval
        require_half_radii: Reject certificates from only the smallest radii
        seed: Seed for the directions

    Returns:
        StabilityResult; diverged rollouts count as d_max = inf
    """
    center = np.asarray(v_eq, dtype=np.float64)
    scl = np.asarray(scale, dtype=np.float64)
    if center.ndim != 1 or scl.shape != center.shape:
        raise DimensionError("equilibrium and scale must be vectors of equal length")
    if not epsilons or any(e <= 0 for e in epsilons):
        raise ConfigurationError("epsilons must be positive", field="analysis.epsilons")

    d = center.shape[0]
    passed = {}
    certified = {}
    diverged_total = 0
    min_radius_index = math.ceil(n_radii / 2) if require_half_radii else 1

    for eps in epsilons:
        rng = make_rng(seed, f"stability/{eps!r}")
        directions = random_directions(rng, n_directions, d)
        radii = np.arange(1, n_radii + 1) * (eps / n_radii)
        d_ini = np.repeat(radii, n_directions)
        offsets = np.tile(directions, (n_radii, 1)) * d_ini[:, None]
        starts = center + offsets * scl

        states, diverged = integrate_batch_masked(field, starts, dt, horizon, substeps)
        dev = np.linalg.norm((states - center) / scl, axis=-1)
        d_max = np.where(diverged, np.inf, np.where(np.isnan(dev), -np.inf, dev).max(axis=1))
        diverged_total += int(diverged.sum())

        radius = certified_radius(d_ini, d_max, eps)
        ok = radius is not None and radius >= min_radius_index * eps / n_radii - 1e-15
        key = repr(float(eps))
        passed[key] = bool(ok)
        certified[key] = radius
        logger.debug(f"epsilon {eps}: certified radius {radius}, passed={ok}")

    stable = all(passed.values())
    logger.info(f"Stability check at {np.round(center, 4).tolist()}: stable={stable}")
    return StabilityResult(
        stable=stable, passed=passed, certified_radius=certified, diverged_samples=diverged_total
    )
