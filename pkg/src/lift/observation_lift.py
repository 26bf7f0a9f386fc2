"""
Observation Lift
Fixed smooth injection of low-dimensional feature vectors into a
high-dimensional observation space: A s + sin(W s + b).
"""

import logging
from dataclasses import dataclass
from typing import Any, Dict

import numpy as np

from src.utils.errors import ConfigurationError, LiftConstructionError
from src.utils.helpers import as_batch, derive_seed

logger = logging.getLogger(__name__)

MAX_ATTEMPTS = 8
FREQUENCY_RANGE = 2.0


@dataclass(frozen=True, eq=False)
class LiftParams:
    """Lift matrices; fully determined by (d_in, D, seed)"""

    d_in: int
    output_dim: int
    seed: int
    frequencies: np.ndarray  # W, (D, d_in)
    phases: np.ndarray  # b, (D,)
    linear: np.ndarray  # A, (D, d_in), orthonormal columns
    attempt: int = 0

    def describe(self) -> Dict[str, Any]:
        return {"d_in": self.d_in, "output_dim": self.output_dim, "seed": self.seed, "attempt": self.attempt}

    @property
    def lipschitz_bound(self) -> float:
        """||A|| + ||W|| in the spectral norm"""
        return float(np.linalg.norm(self.linear, 2) + np.linalg.norm(self.frequencies, 2))


def make_lift(d_in: int, output_dim: int = 64, seed: int = 0) -> LiftParams:
    """
    Sample a lift

    Args:
        d_in: Feature dimension
        output_dim: Observation dimension D, at least 2 * d_in
        seed: Lift seed

    Returns:
        LiftParams whose linear part has full column rank

    Raises:
        ConfigurationError: If D < 2 * d_in
        LiftConstructionError: If no full-rank sample is found
    """
    if d_in < 1 or output_dim < 2 * d_in:
        raise ConfigurationError(
            f"lift output dimension {output_dim} must be at least 2 * d_in = {2 * d_in}", field="lift.output_dim"
        )

    for attempt in range(MAX_ATTEMPTS):
        rng = np.random.default_rng(derive_seed(seed, f"lift/{attempt}"))
        frequencies = rng.uniform(-FREQUENCY_RANGE, FREQUENCY_RANGE, size=(output_dim, d_in))
        phases = rng.uniform(0.0, 2.0 * np.pi, size=output_dim)
        gaussian = rng.standard_normal((output_dim, d_in))
        linear, _ = np.linalg.qr(gaussian)
        if np.linalg.matrix_rank(linear) == d_in and np.all(np.isfinite(linear)):
            return LiftParams(
                d_in=d_in,
                output_dim=output_dim,
                seed=seed,
                frequencies=frequencies,
                phases=phases,
                linear=linear,
                attempt=attempt,
            )
        logger.warning(f"Lift sample {attempt} is rank deficient, resampling")

    logger.error(f"No full-rank lift after {MAX_ATTEMPTS} attempts")
    raise LiftConstructionError(f"no full-rank lift found in {MAX_ATTEMPTS} attempts (seed {seed})")


def apply_lift(lift: LiftParams, s: Any) -> np.ndarray:
    """
    Lift features of shape (..., d_in) to observations of shape (..., D)

    Raises:
        DimensionError: If the trailing dimension is not d_in
    """
    x = as_batch(s, lift.d_in, "lift input")
    return x @ lift.linear.T + np.sin(x @ lift.frequencies.T + lift.phases)
