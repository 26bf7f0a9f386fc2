"""
Field losses
Multi-horizon integrated loss with geometric horizon weights, and the
finite-difference regression baseline.
"""

from dataclasses import dataclass
from typing import List, Optional

import numpy as np

from src.nn.mlp import backward, forward
from src.utils.errors import ConfigurationError, DimensionError
from .integrate import rollout_backward, rollout_with_tape
from .model import FieldModel


@dataclass(frozen=True, eq=False)
class FieldLoss:
    value: float
    grads: Optional[List[np.ndarray]]


def trajectory_batch(trajectories) -> np.ndarray:
    if isinstance(trajectories, np.ndarray):
        batch = np.asarray(trajectories, dtype=np.float64)
    else:
        items = [np.asarray(getattr(t, "states", t), dtype=np.float64) for t in trajectories]
        if len({item.shape for item in items}) > 1:
            raise DimensionError("trajectories in a batch must share one shape")
        batch = np.stack(items) if items else np.empty((0, 0, 0))
    if batch.ndim != 3 or batch.shape[0] == 0:
        raise DimensionError(f"trajectory batch must be (B, N, d) with B >= 1, got {batch.shape}")
    if batch.shape[1] < 2:
        raise DimensionError(f"trajectories need N >= 2 samples, got {batch.shape[1]}")
    return batch


def horizon_weights(rho: float, horizon: int) -> np.ndarray:
    """rho^(j-1) for j = 1..horizon, normalized to sum to 1"""
    w = np.power(float(rho), np.arange(horizon, dtype=np.float64))
    return w / w.sum()


def field_loss(
    model: FieldModel,
    trajectories,
    rho: float,
    dt: float,
    substeps: int = 1,
    starts: Optional[np.ndarray] = None,
    with_grad: bool = True,
) -> FieldLoss:
    """
    Integrated multi-horizon loss

    For each trajectory and start index m the field is integrated from V_m;
    the distances to V_n for n > m are averaged with weights rho^(n-m-1).
    Sums run over starts and the result is averaged over trajectories. When
    only a subset of starts is used the sum is rescaled by (N-1)/S.

    Args:
        model: Field network
        trajectories: (B, N, d) array or equal-length trajectories
        rho: Horizon weight in [0, 1]
        dt: Sampling interval
        substeps: RK4 steps per interval
        starts: Start indices, shape (S,) shared or (B, S); all when None
        with_grad: Also return parameter gradients

    Returns:
        FieldLoss
    """
    if not 0.0 <= rho <= 1.0:
        raise ConfigurationError(f"rho must be in [0, 1], got {rho}", field="field.rho")
    batch = trajectory_batch(trajectories)
    n_traj, n_len, d = batch.shape

    if starts is None:
        start_idx = np.tile(np.arange(n_len - 1), (n_traj, 1))
    else:
        start_idx = np.asarray(starts, dtype=np.int64)
        if start_idx.ndim == 1:
            start_idx = np.tile(start_idx, (n_traj, 1))
        if start_idx.shape[0] != n_traj or np.any(start_idx < 0) or np.any(start_idx > n_len - 2):
            raise DimensionError("start indices must lie in [0, N-2] for every trajectory")
    n_starts = start_idx.shape[1]
    scale = (n_len - 1) / n_starts / n_traj

    traj_of_row = np.repeat(np.arange(n_traj), n_starts)
    m = start_idx.ravel()
    horizons = n_len - 1 - m
    max_h = int(horizons.max())

    v0 = batch[traj_of_row, m]
    pred, tape = rollout_with_tape(model, v0, dt, max_h + 1, substeps)

    j = np.arange(1, max_h + 1)
    mask = j[None, :] <= horizons[:, None]
    target_idx = np.minimum(m[:, None] + j[None, :], n_len - 1)
    target = batch[traj_of_row[:, None], target_idx]

    raw = np.power(float(rho), (j - 1).astype(np.float64))
    weights = np.where(mask, raw[None, :], 0.0)
    weights = weights / weights.sum(axis=1, keepdims=True)

    diff = pred[:, 1:] - target
    dist = np.linalg.norm(diff, axis=-1)
    value = float(scale * np.sum(weights * dist))
    if not with_grad:
        return FieldLoss(value=value, grads=None)

    safe = np.where(dist > 0, dist, 1.0)
    unit = np.where(dist[..., None] > 0, diff / safe[..., None], 0.0)
    grad_states = np.zeros_like(pred)
    grad_states[:, 1:] = scale * weights[..., None] * unit
    grads, _ = rollout_backward(model, tape, grad_states)
    return FieldLoss(value=value, grads=grads)


def finite_difference_loss(model: FieldModel, trajectories, dt: float, with_grad: bool = True) -> FieldLoss:
    """Mean squared error of F(V_n) against (V_{n+1} - V_n) / dt"""
    batch = trajectory_batch(trajectories)
    d = batch.shape[2]
    inputs = batch[:, :-1].reshape(-1, d)
    targets = ((batch[:, 1:] - batch[:, :-1]) / dt).reshape(-1, d)
    pred, cache = forward(model.params, inputs)
    diff = pred - targets
    value = float(np.mean(diff * diff))
    if not with_grad:
        return FieldLoss(value=value, grads=None)
    grads, _ = backward(model.params, cache, 2.0 * diff / diff.size)
    return FieldLoss(value=value, grads=grads)
