"""
Intrinsic dimension
Levina-Bickel maximum-likelihood estimator over exact brute-force nearest
neighbors.
"""

import logging
import math
from typing import List, Optional, Tuple

import numpy as np
from pydantic import BaseModel, Field
from scipy.spatial.distance import cdist

from src.utils.errors import ConfigurationError, DegenerateInputError, DimensionError

logger = logging.getLogger(__name__)

BLOCK_ROWS = 512


class DimensionEstimate(BaseModel):
    raw: float
    rounded: int
    k_min: int
    k_max: int
    per_k: List[float] = Field(default_factory=list)
    n_points: int
    excluded_pairs: int = 0
    excluded_points: int = 0


def round_estimate(raw: float) -> int:
    """Nearest integer, halves rounded up"""
    return int(math.floor(raw + 0.5))


def _as_points(points) -> np.ndarray:
    arr = np.asarray(points, dtype=np.float64)
    if arr.ndim != 2 or arr.shape[0] == 0:
        raise DimensionError(f"points must be a non-empty (n, D) array, got shape {arr.shape}")
    return arr


def nearest_neighbors(points, k: int, exclude_duplicates: bool = False) -> Tuple[np.ndarray, np.ndarray, int]:
    """
    Exact k nearest neighbors of every point, excluding the point itself

    Ties are broken by index. With exclude_duplicates, neighbors at zero
    distance are skipped and counted instead.

    Args:
        points: (n, D) array
        k: Neighbors per point, below n
        exclude_duplicates: Skip zero-distance neighbors

    Returns:
        (distances (n, k) ascending, indices (n, k), excluded pair count);
        rows that run out of neighbors are padded with inf and -1

    Raises:
        ConfigurationError: If k >= n
    """
    x = _as_points(points)
    n = x.shape[0]
    if k < 1 or k >= n:
        raise ConfigurationError(f"k must satisfy 1 <= k < n = {n}, got {k}", field="k")

    distances = np.full((n, k), np.inf)
    indices = np.full((n, k), -1, dtype=np.int64)
    excluded = 0
    for start in range(0, n, BLOCK_ROWS):
        stop = min(start + BLOCK_ROWS, n)
        block = cdist(x[start:stop], x)
        rows = np.arange(stop - start)
        block[rows, rows + start] = np.inf
        if exclude_duplicates:
            zero = block == 0.0
            excluded += int(zero.sum())
            block[zero] = np.inf
        order = np.argsort(block, axis=1, kind="stable")[:, :k]
        picked = np.take_along_axis(block, order, axis=1)
        order = np.where(np.isfinite(picked), order, -1)
        distances[start:stop] = picked
        indices[start:stop] = order
    return distances, indices, excluded


def levina_bickel(
    points,
    k_min: int = 10,
    k_max: int = 20,
    max_points: int = 5000,
    seed: int = 0,
) -> DimensionEstimate:
    """
    Estimate the intrinsic dimension of a point cloud

    For each point and each k the local estimate is
    [ (1/(k-2)) sum_{j<k} ln(T_k / T_j) ]^-1; the result averages over
    points and then over k in [k_min, k_max].

    Args:
        points: (n, D) array
        k_min: Smallest neighbor count (>= 3)
        k_max: Largest neighbor count
        max_points: Seeded subsample cap
        seed: Subsample seed

    Returns:
        DimensionEstimate

    Raises:
        ConfigurationError: If the k range is invalid
        DegenerateInputError: If too few distinct points remain
    """
    x = _as_points(points)
    if k_min < 3 or k_max < k_min:
        raise ConfigurationError(f"need 3 <= k_min <= k_max, got {k_min}..{k_max}", field="dimension.k_min")
    if x.shape[0] > max_points:
        rng = np.random.default_rng(seed)
        keep = np.sort(rng.choice(x.shape[0], size=max_points, replace=False))
        x = x[keep]
        logger.info(f"Subsampled {max_points} points for the neighbor search")
    n = x.shape[0]
    if n <= k_max + 1:
        raise DegenerateInputError(f"need more than k_max + 1 = {k_max + 1} points, got {n}")

    distances, _, excluded = nearest_neighbors(x, k_max, exclude_duplicates=True)
    usable = np.all(np.isfinite(distances), axis=1)
    if excluded:
        logger.warning(f"Excluded {excluded} zero-distance neighbor pairs")
    if not np.any(usable):
        raise DegenerateInputError("all points coincide; no usable neighbor distances")
    dropped = int((~usable).sum())
    if dropped:
        logger.warning(f"Dropped {dropped} points without {k_max} distinct neighbors")

    logs = np.log(distances[usable])
    per_k: List[float] = []
    for k in range(k_min, k_max + 1):
        inner = (logs[:, k - 1:k] - logs[:, : k - 1]).sum(axis=1) / (k - 2)
        with np.errstate(divide="ignore"):
            local = 1.0 / inner
        finite = np.isfinite(local)
        if not np.any(finite):
            raise DegenerateInputError(f"no finite local estimates at k={k}")
        per_k.append(float(np.mean(local[finite])))

    raw = float(np.mean(per_k))
    logger.info(f"Intrinsic dimension estimate {raw:.3f} from {n} points")
    return DimensionEstimate(
        raw=raw,
        rounded=round_estimate(raw),
        k_min=k_min,
        k_max=k_max,
        per_k=per_k,
        n_points=n,
        excluded_pairs=excluded,
        excluded_points=dropped,
    )
