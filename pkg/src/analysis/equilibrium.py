"""
Equilibrium identification
Ranks candidate states by field magnitude, refines them with damped Newton
iterations, merges duplicate roots and characterizes each one.
"""

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np

from src.config import AnalysisConfig, Config
from src.utils.errors import ConvergenceError, DimensionError
from src.utils.helpers import make_rng
from .linearization import eigenvalues_small, jacobian_at, natural_frequencies
from .reports import EquilibriumReport, EquilibriumSearchReport
from .stability import check_stability, data_range

logger = logging.getLogger(__name__)

_CHUNK = 4096


@dataclass(frozen=True)
class NewtonResult:
    root: np.ndarray
    residual: float
    iterations: int
    converged: bool


def _eval(field: Callable, v: np.ndarray) -> np.ndarray:
    return np.asarray(field(v[None, :]), dtype=np.float64)[0]


def field_norms(field: Callable, states: np.ndarray) -> np.ndarray:
    """||F(V)|| for every row, evaluated in chunks"""
    out = np.empty(states.shape[0])
    for lo in range(0, states.shape[0], _CHUNK):
        chunk = states[lo:lo + _CHUNK]
        out[lo:lo + _CHUNK] = np.linalg.norm(np.asarray(field(chunk)), axis=1)
    return out


def newton_solve(
    field: Callable,
    v0: np.ndarray,
    jacobian_method: str = "analytic",
    max_iter: int = 100,
    tol: float = 1e-8,
    fd_step: float = 1e-4,
) -> NewtonResult:
    """
    Damped Newton iteration with Armijo backtracking on ||F||

    Singular Jacobians fall back to a least-squares step.
    """
    v = np.array(v0, dtype=np.float64)
    f = _eval(field, v)
    norm = float(np.linalg.norm(f))
    done = 0
    for it in range(max_iter):
        if norm < tol:
            return NewtonResult(v, norm, it, True)
        jac = jacobian_at(field, v, jacobian_method, fd_step)
        try:
            step = np.linalg.solve(jac, -f)
        except np.linalg.LinAlgError:
            step = np.linalg.lstsq(jac, -f, rcond=None)[0]
        if not np.all(np.isfinite(step)):
            break
        t = 1.0
        while t > 1e-8:
            trial = v + t * step
            f_trial = _eval(field, trial)
            n_trial = float(np.linalg.norm(f_trial))
            if np.isfinite(n_trial) and n_trial <= (1.0 - 1e-4 * t) * norm:
                break
            t *= 0.5
        else:
            break
        v, f, norm = trial, f_trial, n_trial
        done = it + 1
    return NewtonResult(v, norm, done, norm < tol)


def tail_average_candidates(trajectories: Sequence, n_tail: int = 10) -> np.ndarray:
    """
    Mean of the last n_tail states of every trajectory

    Raises:
        DimensionError: If a trajectory is shorter than n_tail
    """
    rows = []
    for traj in trajectories:
        states = np.asarray(getattr(traj, "states", traj), dtype=np.float64)
        if states.shape[0] < n_tail:
            raise DimensionError(f"trajectory of length {states.shape[0]} is shorter than n_tail={n_tail}")
        rows.append(states[-n_tail:].mean(axis=0))
    return np.asarray(rows)


def grid_points(low: np.ndarray, high: np.ndarray, n_grid: int, cap: int, seed: int) -> np.ndarray:
    """Uniform n_grid^d grid over the box, subsampled to at most cap points"""
    d = low.shape[0]
    total = n_grid ** d
    axes = [np.linspace(low[i], high[i], n_grid) for i in range(d)]
    if total <= cap:
        flat = np.arange(total)
    else:
        flat = np.sort(make_rng(seed, "equilibria/grid").choice(total, size=cap, replace=False))
    idx = np.unravel_index(flat, (n_grid,) * d)
    return np.column_stack([axes[i][idx[i]] for i in range(d)])


def lowest_norm(field: Callable, states: np.ndarray, count: int) -> np.ndarray:
    order = np.argsort(field_norms(field, states), kind="stable")
    return states[order[:count]]


def _stack(trajectories: Sequence) -> List[np.ndarray]:
    items = [np.asarray(getattr(t, "states", t), dtype=np.float64) for t in trajectories]
    if not items:
        raise DimensionError("no trajectories given")
    return items


def _characterize(
    field: Callable, root: NewtonResult, source: str, scale: np.ndarray, dt: float,
    cfg: AnalysisConfig, seed: int,
) -> EquilibriumReport:
    stability = check_stability(
        field, root.root, scale, dt,
        epsilons=cfg.epsilons, n_directions=cfg.n_directions, n_radii=cfg.n_radii,
        horizon=cfg.horizon, substeps=cfg.substeps, require_half_radii=cfg.require_half_radii, seed=seed,
    )
    jac = jacobian_at(field, root.root, cfg.jacobian_method, cfg.fd_step)
    eigs: Optional[List[List[float]]] = None
    freqs: List[float] = []
    note = ""
    try:
        values = eigenvalues_small(jac)
        eigs = [[v.real, v.imag] for v in values]
        freqs = natural_frequencies(values, cfg.frequency_tol)
    except (ConvergenceError, DimensionError) as e:
        note = f"eigenvalues unavailable: {e}"
        logger.warning(note)
    return EquilibriumReport(
        v_eq=root.root.tolist(),
        stable=stability.stable,
        stability=stability,
        residual=root.residual,
        source=source,
        newton_iterations=root.iterations,
        jacobian=jac.tolist(),
        eigenvalues=eigs,
        frequencies=freqs,
        note=note,
    )


def find_equilibria(
    field: Callable,
    trajectories: Sequence,
    cfg: AnalysisConfig,
    dt: float,
    seed: int = 0,
    label: str = "smooth",
    scale: Optional[np.ndarray] = None,
) -> EquilibriumSearchReport:
    """
    Find and characterize the equilibria of a field

    Candidates are the C data states with the lowest ||F||, the C lowest
    points of a uniform grid over the data box when d > 2, and one
    tail-averaged state per trajectory in 'tail' mode. Roots must converge,
    lie in the data box and fall below the root tolerance; roots within the
    merge radius of a better root are dropped.

    Args:
        field: Callable on (n, d) arrays, optionally with a jacobian method
        trajectories: Encoded test trajectories
        cfg: Analysis settings
        dt: Sampling interval of the trajectories
        seed: Seed for grid subsampling and stability directions
        label: Run label
        scale: Per-dimension range; the data range when omitted

    Returns:
        EquilibriumSearchReport; an empty list with a note when nothing converges
    """
    items = _stack(trajectories)
    states = np.concatenate(items, axis=0)
    d = states.shape[1]
    low, high = states.min(axis=0), states.max(axis=0)
    rng_scale = data_range(states) if scale is None else np.asarray(scale, dtype=np.float64)
    slack = 1e-9 * rng_scale

    candidates: List[Tuple[str, np.ndarray]] = []
    counts = {}
    data_c = lowest_norm(field, states, cfg.n_candidates)
    candidates += [("data", v) for v in data_c]
    counts["data"] = len(data_c)
    if d > 2:
        grid_c = lowest_norm(field, grid_points(low, high, cfg.n_grid, cfg.grid_cap, seed), cfg.n_candidates)
        candidates += [("grid", v) for v in grid_c]
        counts["grid"] = len(grid_c)
    if cfg.candidate_mode == "tail":
        tail_c = tail_average_candidates(items, cfg.n_tail)
        candidates += [("tail", v) for v in tail_c]
        counts["tail"] = len(tail_c)

    def solve(item: Tuple[str, np.ndarray]) -> Tuple[str, NewtonResult]:
        source, v0 = item
        return source, newton_solve(field, v0, cfg.jacobian_method, cfg.newton_max_iter, cfg.newton_tol, cfg.fd_step)

    with ThreadPoolExecutor(max_workers=max(1, Config.WORKERS)) as pool:
        solved = list(pool.map(solve, candidates))

    converged = [(s, r) for s, r in solved if r.converged and r.residual < cfg.root_tol]
    inside = [
        (s, r) for s, r in converged
        if np.all(r.root >= low - slack) and np.all(r.root <= high + slack)
    ]
    inside.sort(key=lambda sr: sr[1].residual)
    kept: List[Tuple[str, NewtonResult]] = []
    for source, root in inside:
        if all(np.linalg.norm((root.root - k.root) / rng_scale) >= cfg.merge_radius for _, k in kept):
            kept.append((source, root))
    kept.sort(key=lambda sr: tuple(sr[1].root))

    report = EquilibriumSearchReport(
        label=label,
        n_candidates=counts,
        n_converged=len(converged),
        n_rejected_outside=len(converged) - len(inside),
        n_merged=len(inside) - len(kept),
        data_low=low.tolist(),
        data_high=high.tolist(),
    )
    if not kept:
        report.note = "no candidate converged to a root inside the data box"
        logger.warning(f"[{label}] {report.note}")
        return report

    report.equilibria = [_characterize(field, r, s, rng_scale, dt, cfg, seed) for s, r in kept]
    logger.info(
        f"[{label}] {len(report.equilibria)} equilibria, {len(report.stable())} stable "
        f"({len(candidates)} candidates, {len(converged)} converged)"
    )
    return report
