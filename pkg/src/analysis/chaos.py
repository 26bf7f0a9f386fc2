"""
Chaos metrics
Divergence of near trajectory pairs, state-space coverage, a two-cluster
split of coverage rates and distance-to-equilibrium histograms.
"""

import logging
from dataclasses import dataclass
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy.spatial.distance import cdist
from sklearn.cluster import KMeans

from src.config import AnalysisConfig
from src.systems.integrator import integrate_batch_masked
from src.utils.errors import DegenerateInputError, DimensionError
from .reports import ChaosReport

logger = logging.getLogger(__name__)

REGULAR = "regular"
CHAOTIC = "chaotic"


@dataclass(frozen=True)
class KMeansSplit:
    centroids: Tuple[float, float]
    threshold: float
    labels: List[str]


def divergence_series(a: np.ndarray, b: np.ndarray, scale: Optional[np.ndarray] = None) -> np.ndarray:
    """
    ||A(t) - B(t)|| / ||A(0) - B(0)||

    Raises:
        DimensionError: If the trajectories differ in shape
        DegenerateInputError: If they start at the same state
    """
    ta, tb = np.asarray(a, dtype=np.float64), np.asarray(b, dtype=np.float64)
    if ta.shape != tb.shape:
        raise DimensionError(f"trajectory shapes differ: {ta.shape} vs {tb.shape}")
    diff = ta - tb
    if scale is not None:
        diff = diff / np.asarray(scale, dtype=np.float64)
    dist = np.linalg.norm(diff, axis=-1)
    if dist[0] == 0:
        raise DegenerateInputError("trajectories share their initial state")
    return dist / dist[0]


def coverage_series(states: np.ndarray, n_bins: int = 10, low: float = -1.0, high: float = 1.0) -> np.ndarray:
    """Share of the n_bins^d boxes visited by states 0..t, for every t"""
    arr = np.asarray(states, dtype=np.float64)
    if arr.ndim != 2:
        raise DimensionError(f"trajectory must be (n, d), got shape {arr.shape}")
    outside = (arr < low) | (arr > high)
    if np.any(outside):
        logger.warning(f"Clamping {int(np.any(outside, axis=1).sum())} states outside [{low}, {high}] for coverage")
        arr = np.clip(arr, low, high)
    idx = np.floor((arr - low) / (high - low) * n_bins).astype(np.int64)
    idx = np.minimum(idx, n_bins - 1)
    boxes = np.ravel_multi_index(tuple(idx.T), (n_bins,) * arr.shape[1])
    _, first = np.unique(boxes, return_index=True)
    new_box = np.zeros(arr.shape[0])
    new_box[first] = 1.0
    return np.cumsum(new_box) / float(n_bins) ** arr.shape[1]


def coverage_increase_rate(series: np.ndarray, dt: float = 1.0) -> float:
    """(c(T) - c(0)) / T for a series sampled every dt"""
    c = np.asarray(series, dtype=np.float64)
    if c.shape[0] < 2:
        raise DimensionError("coverage series needs at least 2 samples")
    return float((c[-1] - c[0]) / ((c.shape[0] - 1) * dt))


def kmeans_2(values: Sequence[float], restarts: int = 10, seed: int = 0) -> KMeansSplit:
    """
    Split 1-d values into two clusters

    The threshold is the midpoint of the two centroids; values above it are
    labelled chaotic.

    Raises:
        DegenerateInputError: With fewer than two distinct values
    """
    x = np.asarray(values, dtype=np.float64).reshape(-1, 1)
    if np.unique(x).shape[0] < 2:
        raise DegenerateInputError("k-means needs at least two distinct values")
    model = KMeans(n_clusters=2, n_init=restarts, random_state=seed).fit(x)
    low, high = sorted(float(c) for c in model.cluster_centers_.ravel())
    threshold = 0.5 * (low + high)
    labels = [CHAOTIC if v > threshold else REGULAR for v in x.ravel()]
    return KMeansSplit(centroids=(low, high), threshold=threshold, labels=labels)


def rollout_trajectories(
    field: Callable, initial_states: np.ndarray, dt: float, n_steps: int, substeps: int = 1
) -> List[np.ndarray]:
    """Integrate a field from each initial state; diverged rollouts are dropped"""
    states, diverged = integrate_batch_masked(field, np.asarray(initial_states, dtype=np.float64), dt, n_steps, substeps)
    if np.any(diverged):
        logger.warning(f"Dropping {int(diverged.sum())} diverged rollouts")
    return [states[i] for i in range(states.shape[0]) if not diverged[i]]


def _mean_or_none(values: List[float]) -> Optional[float]:
    return float(np.mean(values)) if values else None


def chaos_report(
    trajectories: Sequence,
    cfg: AnalysisConfig,
    dt: float,
    v_eq: Optional[np.ndarray] = None,
    scale: Optional[np.ndarray] = None,
    seed: int = 0,
) -> ChaosReport:
    """
    Classify trajectories as regular or chaotic and assemble the evidence

    Args:
        trajectories: Equal-length (n, d) trajectories sharing dt
        cfg: Analysis settings
        dt: Sampling interval
        v_eq: Stable equilibrium for the distance histograms
        scale: Per-dimension data range; ones when omitted
        seed: k-means seed

    Returns:
        ChaosReport
    """
    items = [np.asarray(getattr(t, "states", t), dtype=np.float64) for t in trajectories]
    if len(items) < 2:
        raise DegenerateInputError("chaos analysis needs at least two trajectories")
    d = items[0].shape[1]
    scl = np.ones(d) if scale is None else np.asarray(scale, dtype=np.float64)
    notes = []

    rates = [coverage_increase_rate(coverage_series(s, cfg.coverage_bins), dt) for s in items]
    try:
        split = kmeans_2(rates, cfg.kmeans_restarts, seed)
        classes, centroids, threshold = split.labels, list(split.centroids), split.threshold
    except DegenerateInputError:
        classes, centroids, threshold = [REGULAR] * len(items), None, None
        notes.append("coverage rates are all equal; every trajectory labelled regular")

    starts = np.stack([s[0] for s in items]) / scl
    dist0 = cdist(starts, starts)
    rows, cols = np.nonzero(np.triu((dist0 > 0) & (dist0 < cfg.near_pair_fraction), k=1))
    pairs, pair_classes, curves = [], [], []
    final: Dict[str, List[float]] = {REGULAR: [], CHAOTIC: []}
    for i, j in zip(rows.tolist(), cols.tolist()):
        if items[i].shape != items[j].shape:
            continue
        curve = divergence_series(items[i], items[j], scl)
        pairs.append([i, j])
        pair_classes.append(classes[i])
        curves.append(curve.tolist())
        final[classes[i]].append(float(curve[-1]))
    if not pairs:
        notes.append("no near pairs; divergence section empty")

    report = ChaosReport(
        rates=rates,
        classes=classes,
        centroids=centroids,
        threshold=threshold,
        pairs=pairs,
        pair_classes=pair_classes,
        final_divergence={k: _mean_or_none(v) for k, v in final.items()},
        divergence_curves=curves,
    )

    if v_eq is not None:
        center = np.asarray(v_eq, dtype=np.float64)
        per_traj = [100.0 * np.linalg.norm((s - center) / scl, axis=-1) for s in items]
        top = max(float(p.max()) for p in per_traj)
        edges = np.linspace(0.0, top if top > 0 else 1.0, cfg.histogram_bins + 1)
        report.histogram_edges = edges.tolist()
        for label in (REGULAR, CHAOTIC):
            chosen = [p for p, c in zip(per_traj, classes) if c == label]
            pooled = np.concatenate(chosen) if chosen else np.empty(0)
            report.histograms[label] = np.histogram(pooled, bins=edges)[0].astype(int).tolist()
            report.mean_distance[label] = float(pooled.mean()) if pooled.size else None

    report.note = "; ".join(notes)
    logger.info(
        f"Chaos report: {classes.count(CHAOTIC)} chaotic, {classes.count(REGULAR)} regular, {len(pairs)} near pairs"
    )
    return report
