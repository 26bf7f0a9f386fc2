"""
Smoothness metrics
SM_{k,p}: the p-norm over time of the k-th time derivative of a trajectory,
optionally after scaling each dimension by its range.
"""

from typing import Dict, Iterable, Optional, Sequence

import numpy as np
import pandas as pd

from src.utils.errors import ConfigurationError, DimensionError

METRICS = ((1, 1.0), (2, 1.0), (1, np.inf), (2, np.inf))


def _derivative(x: np.ndarray, dt: float, k: int) -> np.ndarray:
    if k == 1:
        if x.shape[0] == 2:
            return np.diff(x, axis=0) / dt
        return np.gradient(x, dt, axis=0, edge_order=2)
    return (x[2:] - 2.0 * x[1:-1] + x[:-2]) / (dt * dt)


def smoothness_metric(
    states: np.ndarray,
    dt: float,
    k: int = 1,
    p: float = 1.0,
    normalize: bool = True,
    data_range: Optional[np.ndarray] = None,
) -> float:
    """
    Smoothness of a trajectory; lower is smoother

    Args:
        states: (n, d) trajectory
        dt: Sampling interval
        k: Derivative order, 1 or 2
        p: 1, 2 or inf
        normalize: Divide each dimension by its range first
        data_range: Range to normalize by; the trajectory's own when omitted

    Returns:
        (sum ||d^k V||^p dt)^(1/p), or the max norm for p = inf

    Raises:
        DimensionError: If the trajectory has fewer than k + 1 samples
    """
    if k not in (1, 2):
        raise ConfigurationError(f"derivative order must be 1 or 2, got {k}")
    if p not in (1, 2, np.inf):
        raise ConfigurationError(f"p must be 1, 2 or inf, got {p}")
    x = np.asarray(getattr(states, "states", states), dtype=np.float64)
    if x.ndim == 1:
        x = x[:, None]
    if x.shape[0] < k + 1:
        raise DimensionError(f"need at least {k + 1} samples for k={k}, got {x.shape[0]}")
    if normalize:
        spread = np.ptp(x, axis=0) if data_range is None else np.asarray(data_range, dtype=np.float64)
        x = x / np.where(spread > 0, spread, 1.0)
    norms = np.linalg.norm(_derivative(x, dt, k), axis=-1)
    if np.isinf(p):
        return float(norms.max())
    return float(np.sum(norms ** p * dt) ** (1.0 / p))


def metric_name(k: int, p: float) -> str:
    return f"SM_{k},{'inf' if np.isinf(p) else int(p)}"


def set_range(trajectories: Iterable) -> np.ndarray:
    """Per-dimension range over all samples of a set of trajectories"""
    arrays = [np.asarray(getattr(t, "states", t), dtype=np.float64) for t in trajectories]
    if not arrays:
        raise DimensionError("cannot take the range of an empty trajectory set")
    stacked = np.concatenate([a[:, None] if a.ndim == 1 else a for a in arrays], axis=0)
    return np.ptp(stacked, axis=0)


def smoothness_table(
    groups: Dict[str, Sequence], dt: float, normalize: bool = True, metrics: Sequence = METRICS
) -> pd.DataFrame:
    """
    Mean, standard error and median of each metric for every labelled set

    Args:
        groups: label -> trajectories
        dt: Sampling interval
        normalize: Divide each dimension by its range over the whole labelled set

    Returns:
        DataFrame with columns label, metric, mean, sem, median, count
    """
    rows = []
    for label, trajs in groups.items():
        trajs = list(trajs)
        scale = set_range(trajs) if normalize else None
        rows.extend(
            {"label": label, "metric": metric_name(k, p), "value": smoothness_metric(traj, dt, k, p, normalize, scale)}
            for traj in trajs
            for k, p in metrics
        )
    frame = pd.DataFrame(rows, columns=["label", "metric", "value"])
    table = frame.groupby(["label", "metric"], sort=True)["value"].agg(["mean", "sem", "median", "count"])
    return table.reset_index()
