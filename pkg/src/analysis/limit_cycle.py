"""
Limit-cycle detection
A trajectory tail is a limit cycle when it circles its mean at a distance
and returns close to itself after a fixed lag.
"""

import logging

import numpy as np

from .reports import LimitCycleReport

logger = logging.getLogger(__name__)

MIN_TAIL = 10


def recurrence_profile(tail: np.ndarray, max_lag: int, fraction: float) -> np.ndarray:
    """D(tau): the given quantile of ||V(t + tau) - V(t)|| over t, for tau = 1..max_lag"""
    profile = np.full(max_lag + 1, np.inf)
    for tau in range(1, max_lag + 1):
        gaps = np.linalg.norm(tail[tau:] - tail[:-tau], axis=-1)
        profile[tau] = np.quantile(gaps, fraction)
    return profile


def detect_limit_cycle(
    states: np.ndarray,
    dt: float,
    transient_fraction: float = 0.5,
    annulus_ratio: float = 0.25,
    recurrence_tolerance: float = 0.05,
    recurrence_fraction: float = 0.9,
    min_periods: int = 3,
) -> LimitCycleReport:
    """
    Detect a stable limit cycle in a trajectory

    Drops the leading transient, then requires the tail to keep every state
    farther than annulus_ratio * max radius from its mean, and some lag at
    which recurrence_fraction of the tail returns within
    recurrence_tolerance * mean radius. The period is the lag minimizing the
    recurrence distance in the first window of passing lags.

    Args:
        states: (n, d) trajectory
        dt: Sampling interval
        transient_fraction: Leading share of samples dropped
        annulus_ratio: Minimum over maximum radius
        recurrence_tolerance: Recurrence distance as a share of the mean radius
        recurrence_fraction: Share of tail points that must recur
        min_periods: Periods that must fit in the tail

    Returns:
        LimitCycleReport with status detected, not_detected or inconclusive
    """
    arr = np.asarray(getattr(states, "states", states), dtype=np.float64)
    transient = int(arr.shape[0] * transient_fraction)
    tail = arr[transient:]
    m = tail.shape[0]
    max_lag = m // min_periods
    if m < MIN_TAIL or max_lag < 2:
        return LimitCycleReport(
            status="inconclusive", detected=False, transient_length=transient,
            note=f"tail of {m} samples is too short",
        )

    radius = np.linalg.norm(tail - tail.mean(axis=0), axis=-1)
    max_r = float(radius.max())
    mean_r = float(radius.mean())
    if max_r == 0.0 or radius.min() <= annulus_ratio * max_r:
        return LimitCycleReport(
            status="not_detected", detected=False, mean_radius=mean_r, transient_length=transient,
            note="tail does not stay away from its mean",
        )

    tol = recurrence_tolerance * mean_r
    profile = recurrence_profile(tail, max_lag, recurrence_fraction)
    departed = np.nonzero(profile[1:] > 0.5 * max_r)[0]
    if departed.size == 0:
        return LimitCycleReport(
            status="inconclusive", detected=False, mean_radius=mean_r, transient_length=transient,
            note="trajectory never leaves its neighbourhood within the lag window",
        )
    first_out = int(departed[0]) + 1
    passing = np.nonzero(profile[first_out:] < tol)[0]
    if passing.size == 0:
        returned = np.any(profile[first_out:] < 0.5 * max_r)
        return LimitCycleReport(
            status="not_detected" if returned else "inconclusive",
            detected=False,
            mean_radius=mean_r,
            transient_length=transient,
            recurrence_residual=float(profile[first_out:].min() / mean_r),
            note="no lag satisfies the recurrence test" if returned else "tail shorter than the putative period",
        )

    start = first_out + int(passing[0])
    stop = start
    while stop + 1 <= max_lag and profile[stop + 1] < tol:
        stop += 1
    lag = start + int(np.argmin(profile[start:stop + 1]))
    logger.info(f"Limit cycle detected: period {lag * dt:.4g}s, mean radius {mean_r:.4g}")
    return LimitCycleReport(
        status="detected",
        detected=True,
        period=lag * dt,
        mean_radius=mean_r,
        transient_length=transient,
        recurrence_residual=float(profile[lag] / mean_r),
    )
