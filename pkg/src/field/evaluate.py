"""
Field accuracy on held-out trajectories
"""

import logging
from typing import Optional, Sequence

import numpy as np
from pydantic import BaseModel

from .integrate import integrate_many
from .losses import trajectory_batch
from .model import FieldLike

logger = logging.getLogger(__name__)


class FieldAccuracy(BaseModel):
    n_trajectories: int
    single_step_error: float
    full_horizon_error: Optional[float]
    diverged: int = 0


def evaluate_field(field: FieldLike, trajectories: Sequence, dt: float, substeps: int = 1) -> FieldAccuracy:
    """
    Mean Euclidean error of one-step predictions and of full rollouts from V_0

    Diverged full rollouts are counted and left out of the horizon average.
    """
    batch = trajectory_batch(trajectories)
    n_traj, n_len, d = batch.shape

    one_step, mask = integrate_many(field, batch[:, :-1].reshape(-1, d), dt, 2, substeps)
    err = np.linalg.norm(one_step[:, 1] - batch[:, 1:].reshape(-1, d), axis=-1)
    single = float(np.mean(err[~mask])) if np.any(~mask) else float("nan")

    rollout, diverged = integrate_many(field, batch[:, 0], dt, n_len, substeps)
    ok = ~diverged
    full = float(np.mean(np.linalg.norm(rollout[ok] - batch[ok], axis=-1))) if np.any(ok) else None
    if np.any(diverged):
        logger.warning(f"{int(diverged.sum())} of {n_traj} evaluation rollouts diverged")
    return FieldAccuracy(
        n_trajectories=n_traj,
        single_step_error=single,
        full_horizon_error=full,
        diverged=int(diverged.sum()),
    )
