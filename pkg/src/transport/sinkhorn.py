"""
Sinkhorn divergence
Entropic optimal transport between uniform point clouds with squared
Euclidean cost, solved in the log domain with POT, and its gradient with
respect to the first cloud by the envelope theorem.
"""

import logging
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np
import ot
from scipy.special import xlogy

from src.config import SinkhornConfig
from src.utils.errors import DimensionError

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class TransportResult:
    value: float
    plan: np.ndarray
    converged: bool
    iterations: int


@dataclass(frozen=True)
class SinkhornResult:
    value: float
    gradient: np.ndarray
    converged: bool
    iterations: int


def _check_clouds(a: np.ndarray, b: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    x = np.asarray(a, dtype=np.float64)
    y = np.asarray(b, dtype=np.float64)
    if x.ndim != 2 or y.ndim != 2 or x.shape[0] == 0 or y.shape[0] == 0:
        raise DimensionError(f"point sets must be non-empty 2-d arrays, got {x.shape} and {y.shape}")
    if x.shape[1] != y.shape[1]:
        raise DimensionError(f"point sets differ in dimension: {x.shape[1]} vs {y.shape[1]}")
    return x, y


def entropic_transport(x: np.ndarray, y: np.ndarray, cfg: SinkhornConfig) -> TransportResult:
    """
    Entropic OT value <pi, C> + eps * KL(pi | a x b) between uniform clouds

    Args:
        x: Points (n, d)
        y: Points (m, d)
        cfg: Solver settings

    Returns:
        TransportResult with the coupling
    """
    a = np.full(x.shape[0], 1.0 / x.shape[0])
    b = np.full(y.shape[0], 1.0 / y.shape[0])
    cost = ot.dist(x, y, metric="sqeuclidean")
    plan, log = ot.sinkhorn(
        a,
        b,
        cost,
        cfg.blur,
        method="sinkhorn_log",
        numItermax=cfg.max_iter,
        stopThr=cfg.tolerance,
        log=True,
        warn=False,
    )
    errors = log.get("err", [])
    converged = bool(len(errors) > 0 and errors[-1] < cfg.tolerance)
    iterations = int(log.get("niter", cfg.max_iter))
    product = np.outer(a, b)
    kl = float(np.sum(xlogy(plan, plan) - xlogy(plan, product)))
    value = float(np.sum(plan * cost)) + cfg.blur * kl
    return TransportResult(value=value, plan=plan, converged=converged, iterations=iterations)


def sinkhorn_divergence(a: np.ndarray, b: np.ndarray, cfg: Optional[SinkhornConfig] = None) -> SinkhornResult:
    """
    Sinkhorn divergence and its gradient with respect to the first cloud

    Debiased form: OT(A, B) - OT(A, A) / 2 - OT(B, B) / 2. The gradient
    differentiates the cost at the converged couplings.

    Args:
        a: Points (n, d); the gradient is taken with respect to these
        b: Points (m, d)
        cfg: Solver settings, defaults when None

    Returns:
        SinkhornResult; converged is False if any solve hit max_iter

    Raises:
        DimensionError: If a cloud is empty or the dimensions differ
    """
    cfg = cfg or SinkhornConfig()
    x, y = _check_clouds(a, b)

    cross = entropic_transport(x, y, cfg)
    value = cross.value
    grad = 2.0 * (x * cross.plan.sum(axis=1)[:, None] - cross.plan @ y)
    converged = cross.converged
    iterations = cross.iterations

    if cfg.debiased:
        self_x = entropic_transport(x, x, cfg)
        self_y = entropic_transport(y, y, cfg)
        value = value - 0.5 * self_x.value - 0.5 * self_y.value
        grad = grad - 2.0 * (x * self_x.plan.sum(axis=1)[:, None] - self_x.plan @ x)
        converged = converged and self_x.converged and self_y.converged
        iterations = max(iterations, self_x.iterations, self_y.iterations)

    if not converged:
        logger.warning(f"Sinkhorn did not converge within {cfg.max_iter} iterations")
    return SinkhornResult(value=value, gradient=grad, converged=converged, iterations=iterations)


def uniform_reference(d: int, n: int, seed: int) -> np.ndarray:
    """
    Seeded uniform samples on [-1, 1]^d

    Raises:
        DimensionError: If d or n is below 1
    """
    if d < 1 or n < 1:
        raise DimensionError(f"uniform reference needs d >= 1 and n >= 1, got d={d}, n={n}")
    rng = np.random.default_rng(seed)
    return rng.uniform(-1.0, 1.0, size=(n, d))
