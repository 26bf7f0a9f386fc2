"""
Dataset Builder
Simulates sequences of a ground-truth system, lifts them into observation
space and persists them as one table per sequence plus a manifest.
"""

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence

import numpy as np
from pydantic import BaseModel

from src.config import Config
from src.exporters import CSVExporter, JSONExporter
from src.systems.dynamics import get_system, initial_box, make_deriv, resolve_params, sample_initial_state
from src.systems.integrator import integrate_fixed_step
from src.systems.trajectory import simulate
from src.utils.errors import ConfigurationError, MissingArtifactError
from src.utils.helpers import derive_seed, make_rng
from .features import feature_dim, state_to_features
from .observation_lift import LiftParams, apply_lift, make_lift

logger = logging.getLogger(__name__)

SPLITS = ("train", "val", "test")
MANIFEST_NAME = "manifest.json"


@dataclass(frozen=True, eq=False)
class LatentSeries:
    """Lifted observations of one sequence, with the states they came from"""

    observations: np.ndarray  # (n, D)
    states: np.ndarray  # (n, state_dim)
    dt: float
    system: str
    lift_seed: int
    seed: int
    split: str = "train"
    index: int = 0

    def __len__(self) -> int:
        return self.observations.shape[0]

    @property
    def provenance(self) -> Dict[str, Any]:
        return {"system": self.system, "lift_seed": self.lift_seed, "seed": self.seed}


@dataclass
class Dataset:
    """Train / validation / test splits of LatentSeries"""

    splits: Dict[str, List[LatentSeries]]
    system: str
    params: Dict[str, float]
    lift: LiftParams
    dt: float
    seq_len: int
    seed: int
    angle_features: Optional[bool] = None
    meta: Dict[str, Any] = field(default_factory=dict)

    def observations(self, split: str) -> np.ndarray:
        """All observations of a split stacked into (n, D)"""
        return np.concatenate([s.observations for s in self.splits[split]], axis=0)

    def states(self, split: str) -> np.ndarray:
        return np.concatenate([s.states for s in self.splits[split]], axis=0)


def _simulate_one(
    system: str,
    params: BaseModel,
    lift: LiftParams,
    split: str,
    index: int,
    seed: int,
    dt: float,
    seq_len: int,
    substeps: int,
    low: Optional[Sequence[float]],
    high: Optional[Sequence[float]],
    angle_features: Optional[bool],
) -> LatentSeries:
    spec = get_system(system)
    seq_seed = derive_seed(seed, f"dataset/{split}/{index}")
    initial = sample_initial_state(system, params, seq_seed, low, high)
    traj = simulate(system, params, initial, dt, seq_len, substeps, seed=seq_seed)
    observations = apply_lift(lift, state_to_features(spec, traj.states, angle_features))
    return LatentSeries(
        observations=observations,
        states=traj.states,
        dt=dt,
        system=system,
        lift_seed=lift.seed,
        seed=seq_seed,
        split=split,
        index=index,
    )


def build_dataset(
    system: str,
    params: BaseModel,
    lift: LiftParams,
    split_sizes: Dict[str, int],
    dt: float,
    seq_len: int,
    seed: int,
    substeps: int = 10,
    low: Optional[Sequence[float]] = None,
    high: Optional[Sequence[float]] = None,
    angle_features: Optional[bool] = None,
    workers: int = 1,
) -> Dataset:
    """
    Simulate and lift every sequence of every split

    Args:
        system: System name
        params: System parameter model
        lift: Observation lift
        split_sizes: Sequences per split, keys train/val/test
        dt: Sampling interval
        seq_len: Samples per sequence (>= 2)
        seed: Global seed; sequence seeds derive from (split, index)
        substeps: Internal RK4 steps per sample
        low: Initial-state box lower corner
        high: Initial-state box upper corner
        angle_features: Feed angles as (sin, cos) pairs
        workers: Thread count; results do not depend on it

    Returns:
        Dataset
    """
    if seq_len < 2:
        raise ConfigurationError(f"seq_len must be >= 2, got {seq_len}", field="dataset.seq_len")
    for split in SPLITS:
        if split_sizes.get(split, 0) < 1:
            raise ConfigurationError(f"split '{split}' must be positive", field=f"dataset.n_{split}")
    spec = get_system(system)
    if feature_dim(spec, angle_features) != lift.d_in:
        raise ConfigurationError(
            f"lift input dimension {lift.d_in} does not match {system} features", field="lift"
        )

    jobs = [(split, i) for split in SPLITS for i in range(split_sizes[split])]
    logger.info(f"Simulating {len(jobs)} {system} sequences of {seq_len} samples")

    def run(job):
        split, index = job
        return _simulate_one(system, params, lift, split, index, seed, dt, seq_len, substeps, low, high, angle_features)

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            series = list(pool.map(run, jobs))
    else:
        series = [run(job) for job in jobs]

    splits: Dict[str, List[LatentSeries]] = {split: [] for split in SPLITS}
    for item in series:
        splits[item.split].append(item)

    return Dataset(
        splits=splits,
        system=system,
        params=params.model_dump(),
        lift=lift,
        dt=dt,
        seq_len=seq_len,
        seed=seed,
        angle_features=angle_features,
        meta={
            "substeps": substeps,
            "low": None if low is None else [float(v) for v in low],
            "high": None if high is None else [float(v) for v in high],
        },
    )


def independent_frames(dataset: Dataset, n: int, seed: int) -> np.ndarray:
    """
    Lifted frames of n fresh sequences, one frame each

    Each sequence starts in the dataset's initial-state box and is read at
    a uniformly drawn sample index, so the frames follow the distribution of
    the dataset's frames while no two lie on the same trajectory.

    Args:
        dataset: Dataset whose system, sampling grid and lift are reused
        n: Number of frames
        seed: Seed of the draw

    Returns:
        (n, D) observations
    """
    if n < 1:
        raise ConfigurationError(f"frame count must be positive, got {n}", field="dimension.max_points")
    spec = get_system(dataset.system)
    params = resolve_params(dataset.system, dataset.params)
    low, high = initial_box(dataset.system, dataset.meta.get("low"), dataset.meta.get("high"))
    substeps = int(dataset.meta.get("substeps", 10))

    rng = make_rng(seed, "frames")
    starts = low + (high - low) * rng.random((n, spec.state_dim))
    picks = rng.integers(0, dataset.seq_len, size=n)
    paths = integrate_fixed_step(make_deriv(dataset.system, params), starts, dataset.dt, max(2, int(picks.max()) + 1), substeps)
    states = paths[np.arange(n), picks]
    logger.info(f"Drew {n} independent {dataset.system} frames")
    return apply_lift(dataset.lift, state_to_features(spec, states, dataset.angle_features))


# ============================================================================
# Persistence
# ============================================================================

def _columns(spec_names: Sequence[str], output_dim: int) -> List[str]:
    return ["t"] + [f"s_{n}" for n in spec_names] + [f"o_{j:02d}" for j in range(output_dim)]


def sequence_path(root: Path, split: str, index: int) -> Path:
    return root / split / f"seq_{index:04d}.csv"


def write_dataset(dataset: Dataset, out_dir: Path) -> List[Path]:
    """
    Write one table per sequence plus the manifest

    Returns:
        Written paths, manifest last
    """
    root = Path(out_dir)
    spec = get_system(dataset.system)
    columns = _columns(spec.state_names, dataset.lift.output_dim)
    written: List[Path] = []
    files: Dict[str, List[str]] = {}

    for split in SPLITS:
        files[split] = []
        for item in dataset.splits[split]:
            times = dataset.dt * np.arange(len(item))
            table = np.column_stack([times, item.states, item.observations])
            header = {
                "system": dataset.system,
                "params": dataset.params,
                "dt": dataset.dt,
                "n_steps": len(item),
                "seed": item.seed,
                "lift_seed": item.lift_seed,
                "split": split,
                "index": item.index,
                "format_version": Config.FORMAT_VERSION,
            }
            path = sequence_path(root, split, item.index)
            CSVExporter.export_series(table, columns, path, header)
            written.append(path)
            files[split].append(path.relative_to(root).as_posix())

    manifest = {
        "format_version": Config.FORMAT_VERSION,
        "system": dataset.system,
        "params": dataset.params,
        "dt": dataset.dt,
        "seq_len": dataset.seq_len,
        "seed": dataset.seed,
        "angle_features": dataset.angle_features,
        "sampling": dataset.meta,
        "lift": dataset.lift.describe(),
        "splits": files,
    }
    manifest_path = root / MANIFEST_NAME
    JSONExporter.export(manifest, manifest_path)
    written.append(manifest_path)
    logger.info(f"Dataset written to {root}")
    return written


def load_dataset(out_dir: Path) -> Dataset:
    """
    Read a dataset written by write_dataset

    Raises:
        MissingArtifactError: If the manifest or a sequence file is missing
        ConfigurationError: If the manifest has another format version
    """
    root = Path(out_dir)
    manifest_path = root / MANIFEST_NAME
    if not manifest_path.exists():
        raise MissingArtifactError(f"Dataset manifest not found: {manifest_path}", field="dataset")
    manifest = JSONExporter.load(manifest_path)
    if manifest.get("format_version") != Config.FORMAT_VERSION:
        raise ConfigurationError("dataset format_version mismatch", field="format_version")

    system = manifest["system"]
    spec = get_system(system)
    resolve_params(system, manifest["params"])
    lift_info = manifest["lift"]
    lift = make_lift(lift_info["d_in"], lift_info["output_dim"], lift_info["seed"])
    n_state = spec.state_dim

    splits: Dict[str, List[LatentSeries]] = {}
    for split in SPLITS:
        splits[split] = []
        for rel in manifest["splits"][split]:
            header, frame = CSVExporter.load_frame(root / rel)
            values = frame.to_numpy(dtype=np.float64)
            splits[split].append(
                LatentSeries(
                    observations=values[:, 1 + n_state:],
                    states=values[:, 1:1 + n_state],
                    dt=float(header["dt"]),
                    system=system,
                    lift_seed=int(header["lift_seed"]),
                    seed=int(header["seed"]),
                    split=split,
                    index=int(header["index"]),
                )
            )

    return Dataset(
        splits=splits,
        system=system,
        params=manifest["params"],
        lift=lift,
        dt=float(manifest["dt"]),
        seq_len=int(manifest["seq_len"]),
        seed=int(manifest["seed"]),
        angle_features=manifest.get("angle_features"),
        meta=manifest.get("sampling") or {},
    )
