"""
Trajectory filtering
Drops trajectories containing a step longer than a percentile of all step
lengths in their subset.
"""

import logging
from dataclasses import dataclass
from typing import List, Sequence

import numpy as np

from src.utils.errors import ConfigurationError, DegenerateInputError, UnusableEmbeddingError

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class FilterResult:
    kept: List
    kept_indices: List[int]
    removed_indices: List[int]
    threshold: float


def step_lengths(states: np.ndarray) -> np.ndarray:
    """||V_{t+1} - V_t|| for every consecutive pair"""
    return np.linalg.norm(np.diff(states, axis=0), axis=-1)


def filter_trajectories(trajectories: Sequence, percentile: float = 99.0) -> FilterResult:
    """
    Remove trajectories with any step above the subset's step-length percentile

    Args:
        trajectories: Arrays (n, d) or objects with a ``states`` array
        percentile: In (0, 100]

    Returns:
        FilterResult with the kept trajectories in their original order

    Raises:
        DegenerateInputError: If the set is empty
        UnusableEmbeddingError: If every trajectory is removed
    """
    if not 0.0 < percentile <= 100.0:
        raise ConfigurationError(f"percentile must be in (0, 100], got {percentile}", field="field.filter_percentile")
    if len(trajectories) == 0:
        raise DegenerateInputError("no trajectories to filter")

    steps = [step_lengths(np.asarray(getattr(t, "states", t), dtype=np.float64)) for t in trajectories]
    threshold = float(np.percentile(np.concatenate(steps), percentile))
    removed = [i for i, s in enumerate(steps) if np.any(s > threshold)]
    kept_idx = [i for i in range(len(trajectories)) if i not in set(removed)]
    if not kept_idx:
        logger.error("Filtering removed every trajectory")
        raise UnusableEmbeddingError(f"all {len(trajectories)} trajectories exceed the step threshold {threshold:.4g}")
    if removed:
        logger.info(f"Filtered {len(removed)} of {len(trajectories)} trajectories (threshold {threshold:.4g})")
    return FilterResult(
        kept=[trajectories[i] for i in kept_idx],
        kept_indices=kept_idx,
        removed_indices=removed,
        threshold=threshold,
    )
