"""
Pipeline commands
One function per command. Each validates its configuration and upstream
artifacts before doing any work, writes its outputs under the run directory,
records a manifest of content hashes and appends to the run event log.
"""

import logging
import shutil
from contextlib import contextmanager
from pathlib import Path
from typing import Any, Dict, Iterator, List, Optional, Sequence, Union

import numpy as np
import pandas as pd
from scipy.spatial.distance import cdist

from src.analysis import (
    chaos_report,
    data_range,
    detect_limit_cycle,
    find_equilibria,
    near_equilibrium_rollouts,
    rollout_trajectories,
    smoothness_table,
    synthesis_report,
    synthesize,
)
from src.analysis.reports import EquilibriumSearchReport, LimitCycleSummary
from src.analysis.stability import random_directions
from src.config import Config, EmbedConfig, PipelineConfig
from src.dimension import levina_bickel
from src.embed import decode, encode_dataset, load_embedding, load_encoded, save_embedding, train_embedding, write_encoded
from src.exporters import CSVExporter, JSONExporter
from src.field import evaluate_field, filter_trajectories, integrate_many, load_field, save_field, train_field
from src.lift import build_dataset, feature_dim, independent_frames, load_dataset, make_lift, write_dataset
from src.systems import get_system, linear_frequencies, resolve_params, sample_initial_state
from src.utils.errors import (
    ConfigurationError,
    DegenerateInputError,
    MissingArtifactError,
    NsvError,
    ProvenanceError,
    TrainingDivergedError,
)
from src.utils.helpers import derive_seed, hash_text, make_rng
from .layout import RunLayout, check_label
from .provenance import manifest_path, utc_now, verify_stage, write_manifest
from .run_log import RunLog

logger = logging.getLogger(__name__)

SMOOTH = "smooth"
BASELINE = "baseline"
PathLike = Union[str, Path]


class StageRun:
    """Bookkeeping of one command on one stage"""

    def __init__(
        self,
        cfg: PipelineConfig,
        out: Optional[PathLike],
        command: str,
        stage: str,
        label: Optional[str],
        dry_run: bool,
        command_line: Optional[Sequence[str]],
    ):
        self.cfg = cfg
        self.layout = RunLayout.at(out or cfg.output_dir)
        self.command = command
        self.stage = stage
        self.label = label
        self.dry_run = dry_run
        self.command_line = list(command_line or [])
        self.started = utc_now()
        self.inputs: List[Path] = []
        self.log: Optional[RunLog] = None if dry_run else RunLog(self.layout.root, command)

    @property
    def root(self) -> Path:
        return self.layout.root

    def require(self, stage: str) -> None:
        """Verify an upstream stage and record its manifest as an input"""
        try:
            verify_stage(self.root, stage)
        except ProvenanceError as e:
            if self.log:
                self.log.provenance_mismatch(stage, e.diff)
            raise
        self.inputs.append(manifest_path(self.root, stage))

    def fresh_dir(self, path: Path) -> Path:
        shutil.rmtree(path, ignore_errors=True)
        path.mkdir(parents=True, exist_ok=True)
        return path

    def dry(self, **details: Any) -> Dict[str, Any]:
        logger.info(f"{self.command}: configuration and inputs valid (dry run)")
        return {"command": self.command, "stage": self.stage, "dry_run": True, **details}

    def finish(self, outputs: Sequence[Path], **details: Any) -> Dict[str, Any]:
        manifest = write_manifest(
            self.root,
            self.stage,
            self.command,
            self.cfg.seed,
            self.inputs,
            outputs,
            self.started,
            command_line=self.command_line,
            label=self.label,
            config_hash=hash_text(JSONExporter.dumps(self.cfg)),
        )
        if self.log:
            self.log.command_finished(True, {"stage": self.stage, **details})
        return {"command": self.command, "stage": self.stage, "outputs": len(manifest.outputs), **details}


@contextmanager
def stage_run(
    cfg: PipelineConfig,
    out: Optional[PathLike],
    command: str,
    stage: str,
    label: Optional[str] = None,
    dry_run: bool = False,
    command_line: Optional[Sequence[str]] = None,
) -> Iterator[StageRun]:
    run = StageRun(cfg, out, command, stage, label, dry_run, command_line)
    try:
        yield run
    except NsvError as e:
        if run.log:
            run.log.command_finished(False, {"stage": stage, "error": type(e).__name__, "message": str(e)})
        raise
    finally:
        if run.log:
            run.log.close()


def _encoded(run_layout: RunLayout, label: str):
    encoded = load_encoded(run_layout.encoded(label))
    if not encoded["test"]:
        raise DegenerateInputError(f"no encoded test trajectories for '{label}'")
    return encoded


def _stable_equilibrium(run_layout: RunLayout, label: str) -> Optional[np.ndarray]:
    path = run_layout.analysis(label) / "equilibria" / "report.json"
    report = EquilibriumSearchReport.model_validate(JSONExporter.load(path))
    stable = report.stable()
    return np.asarray(stable[0].v_eq) if stable else None


def embed_config_for(cfg: PipelineConfig, label: str) -> EmbedConfig:
    """The baseline label trains with the smoothness and space-filling terms off"""
    return cfg.embed.regularizers_off() if label == BASELINE else cfg.embed


def resolve_latent_dim(cfg: PipelineConfig, layout: RunLayout) -> int:
    """
    embed.intrinsic_dim when set, otherwise the rounded dimension estimate

    Raises:
        MissingArtifactError: If neither is available
        ConfigurationError: If the estimate is outside 1..4
    """
    if cfg.embed.intrinsic_dim is not None:
        return cfg.embed.intrinsic_dim
    if not layout.dimension_estimate.exists():
        raise MissingArtifactError(
            "no intrinsic dimension: set embed.intrinsic_dim or run estimate-dim", field="embed.intrinsic_dim"
        )
    d = int(JSONExporter.load(layout.dimension_estimate)["estimate"]["rounded"])
    if not 1 <= d <= 4:
        raise ConfigurationError(f"estimated dimension {d} is outside 1..4", field="embed.intrinsic_dim")
    return d


# ============================================================================
# Data
# ============================================================================

def cmd_simulate(
    cfg: PipelineConfig, out: Optional[PathLike] = None, dry_run: bool = False,
    command_line: Optional[Sequence[str]] = None,
) -> Dict[str, Any]:
    """Simulate, lift and write the train/val/test dataset"""
    name = cfg.system.name
    spec = get_system(name)
    params = resolve_params(name, cfg.system.params)
    sample_initial_state(name, params, 0, cfg.system.amplitude_low, cfg.system.amplitude_high)
    lift = make_lift(feature_dim(spec, cfg.lift.angle_features), cfg.lift.output_dim, derive_seed(cfg.seed, "lift"))

    with stage_run(cfg, out, "simulate", "simulate", dry_run=dry_run, command_line=command_line) as run:
        sizes = {"train": cfg.dataset.n_train, "val": cfg.dataset.n_val, "test": cfg.dataset.n_test}
        if dry_run:
            return run.dry(sequences=sum(sizes.values()))
        dataset = build_dataset(
            name, params, lift, sizes, cfg.dataset.dt, cfg.dataset.seq_len, cfg.seed,
            substeps=cfg.system.substeps, low=cfg.system.amplitude_low, high=cfg.system.amplitude_high,
            angle_features=cfg.lift.angle_features, workers=Config.WORKERS,
        )
        run.fresh_dir(run.layout.dataset)
        written = write_dataset(dataset, run.layout.dataset)
        run.log.dataset_written(run.layout.dataset, len(written) - 1)
        return run.finish([run.layout.dataset], sequences=len(written) - 1)


def cmd_estimate_dim(
    cfg: PipelineConfig, out: Optional[PathLike] = None, dry_run: bool = False,
    command_line: Optional[Sequence[str]] = None,
) -> Dict[str, Any]:
    """Levina-Bickel estimate on the lifted observations"""
    with stage_run(cfg, out, "estimate-dim", "dimension", dry_run=dry_run, command_line=command_line) as run:
        run.require("simulate")
        if dry_run:
            return run.dry()
        dataset = load_dataset(run.layout.dataset)
        dim_cfg = cfg.dimension
        if dim_cfg.source == "frames":
            points = independent_frames(dataset, dim_cfg.max_points, derive_seed(cfg.seed, "dimension/frames"))
        elif dim_cfg.split == "all":
            points = np.concatenate([dataset.observations(s) for s in ("train", "val", "test")])
        else:
            points = dataset.observations(dim_cfg.split)
        estimate = levina_bickel(points, dim_cfg.k_min, dim_cfg.k_max, dim_cfg.max_points, derive_seed(cfg.seed, "dimension"))

        run.fresh_dir(run.layout.dimension)
        document = {
            "system": dataset.system,
            "source": dim_cfg.source,
            "split": dim_cfg.split,
            "reference_dim": get_system(dataset.system).intrinsic_dim,
            "estimate": estimate,
        }
        JSONExporter.export(document, run.layout.dimension_estimate)
        ks = np.arange(dim_cfg.k_min, dim_cfg.k_max + 1)
        CSVExporter.export_series(
            np.column_stack([ks, estimate.per_k]), ["k", "estimate"], run.layout.dimension / "per_k.csv"
        )
        run.log.report_written(run.layout.dimension_estimate)
        logger.info(f"Intrinsic dimension {estimate.raw:.3f} -> {estimate.rounded}")
        return run.finish([run.layout.dimension], raw=estimate.raw, rounded=estimate.rounded)


# ============================================================================
# Training
# ============================================================================

def cmd_train_embed(
    cfg: PipelineConfig, out: Optional[PathLike] = None, label: str = SMOOTH, dry_run: bool = False,
    command_line: Optional[Sequence[str]] = None,
) -> Dict[str, Any]:
    """Train the autoencoder and encode every split"""
    label = check_label(label)
    with stage_run(cfg, out, "train-embed", f"embed/{label}", label, dry_run, command_line) as run:
        run.require("simulate")
        if cfg.embed.intrinsic_dim is None:
            run.require("dimension")
        d = resolve_latent_dim(cfg, run.layout)
        embed_cfg = embed_config_for(cfg, label)
        if dry_run:
            return run.dry(latent_dim=d)

        dataset = load_dataset(run.layout.dataset)
        try:
            model, report = train_embedding(dataset, embed_cfg, d, derive_seed(cfg.seed, "embed"), label)
        except TrainingDivergedError as e:
            run.log.training_aborted("embed", e.step, str(e))
            raise

        target = run.fresh_dir(run.layout.embed(label))
        checkpoint = save_embedding(
            model, target / "checkpoint.json", cfg.seed, {"label": label, "system": dataset.system}
        )
        run.log.checkpoint_saved(checkpoint, label)
        JSONExporter.export(report, target / "report.json")
        CSVExporter.export_frame(report.curve(), target / "curve.csv", {"label": label, "kind": "embed"})
        CSVExporter.export_frame(report.validation_curve(), target / "validation.csv", {"label": label, "kind": "embed"})
        write_encoded(encode_dataset(model, dataset), run.layout.encoded(label))
        run.log.report_written(target / "report.json")
        return run.finish([target], latent_dim=d, best_validation=report.best_validation)


def cmd_train_field(
    cfg: PipelineConfig, out: Optional[PathLike] = None, label: str = SMOOTH, dry_run: bool = False,
    command_line: Optional[Sequence[str]] = None,
) -> Dict[str, Any]:
    """Filter the encoded training trajectories and fit the vector field"""
    label = check_label(label)
    with stage_run(cfg, out, "train-field", f"field/{label}", label, dry_run, command_line) as run:
        run.require(f"embed/{label}")
        if dry_run:
            return run.dry()

        encoded = _encoded(run.layout, label)
        train, val, test = encoded["train"], encoded["val"], encoded["test"]
        dt = train[0].dt
        field_cfg = cfg.field
        target = run.fresh_dir(run.layout.field(label))

        if field_cfg.filter:
            result = filter_trajectories(train, field_cfg.filter_percentile)
            train = result.kept
            JSONExporter.export(
                {
                    "percentile": field_cfg.filter_percentile,
                    "threshold": result.threshold,
                    "kept_indices": result.kept_indices,
                    "removed_indices": result.removed_indices,
                },
                target / "filter.json",
            )

        try:
            model, report = train_field(train, val, field_cfg, dt, derive_seed(cfg.seed, "field"), label)
        except TrainingDivergedError as e:
            run.log.training_aborted("field", e.step, str(e))
            raise

        accuracy = evaluate_field(model, test, dt, field_cfg.substeps)
        report.extra["test_accuracy"] = accuracy.model_dump()
        checkpoint = save_field(model, target / "checkpoint.json", cfg.seed, {"label": label, "mode": field_cfg.mode})
        run.log.checkpoint_saved(checkpoint, label)
        JSONExporter.export(report, target / "report.json")
        CSVExporter.export_frame(report.curve(), target / "curve.csv", {"label": label, "kind": "field"})
        CSVExporter.export_frame(report.validation_curve(), target / "validation.csv", {"label": label, "kind": "field"})
        run.log.report_written(target / "report.json")
        return run.finish(
            [target], best_validation=report.best_validation, single_step_error=accuracy.single_step_error
        )


# ============================================================================
# Analysis
# ============================================================================

def _ground_truth_check(report: EquilibriumSearchReport, run_layout: RunLayout, label: str) -> None:
    """Decode each stable equilibrium and compare its nearest test state with the system's equilibrium"""
    dataset = load_dataset(run_layout.dataset)
    model = load_embedding(run_layout.embed(label) / "checkpoint.json")
    observations = dataset.observations("test")
    states = dataset.states("test")
    spec = get_system(dataset.system)
    state_range = data_range(states)
    for entry in report.equilibria:
        if not entry.stable:
            continue
        decoded = decode(model, np.asarray(entry.v_eq))
        nearest = int(np.argmin(cdist(decoded[None, :], observations)[0]))
        entry.decoded_state = states[nearest].tolist()
        entry.ground_truth_error = (np.abs(states[nearest] - spec.equilibrium) / state_range).tolist()


def cmd_analyze_equilibria(
    cfg: PipelineConfig, out: Optional[PathLike] = None, label: str = SMOOTH, dry_run: bool = False,
    command_line: Optional[Sequence[str]] = None,
) -> Dict[str, Any]:
    """Equilibria, stability, frequencies, ground-truth error and near-equilibrium rollouts"""
    label = check_label(label)
    with stage_run(cfg, out, "analyze-equilibria", f"equilibria/{label}", label, dry_run, command_line) as run:
        run.require("simulate")
        run.require(f"embed/{label}")
        run.require(f"field/{label}")
        if dry_run:
            return run.dry()

        field = load_field(run.layout.field(label) / "checkpoint.json")
        test = _encoded(run.layout, label)["test"]
        dt = test[0].dt
        scale = data_range(np.concatenate([t.states for t in test]))
        acfg = cfg.analysis

        report = find_equilibria(field, test, acfg, dt, derive_seed(cfg.seed, "analysis/equilibria"), label, scale)
        dataset_manifest = JSONExporter.load(run.layout.dataset / "manifest.json")
        report.reference_frequencies = linear_frequencies(
            dataset_manifest["system"], resolve_params(dataset_manifest["system"], dataset_manifest["params"])
        )
        _ground_truth_check(report, run.layout, label)

        target = run.fresh_dir(run.layout.analysis(label) / "equilibria")
        stable = report.stable()
        if stable:
            v_eq = np.asarray(stable[0].v_eq)
            rollouts = near_equilibrium_rollouts(
                field, v_eq, scale, acfg.near_eq_delta, acfg.near_eq_rollouts, acfg.near_eq_steps, dt, acfg.substeps
            )
            CSVExporter.export_frame(_long_table(rollouts, dt), target / "near_equilibrium.csv", {"label": label})
        JSONExporter.export(report, target / "report.json")
        run.log.report_written(target / "report.json")
        return run.finish(
            [target],
            equilibria=len(report.equilibria),
            stable=len(stable),
            frequencies=stable[0].frequencies if stable else [],
        )


def _long_table(rollouts: np.ndarray, dt: float) -> pd.DataFrame:
    m, n, d = rollouts.shape
    frame = pd.DataFrame(rollouts.reshape(m * n, d), columns=[f"v{j}" for j in range(d)])
    frame.insert(0, "t", np.tile(dt * np.arange(n), m))
    frame.insert(0, "rollout", np.repeat(np.arange(m), n))
    return frame


def chaos_trajectories(field, test, cfg: PipelineConfig, scale: np.ndarray) -> List[np.ndarray]:
    """Field rollouts from every encoded test start and from a twin offset by pair_offset"""
    acfg = cfg.analysis
    starts = np.stack([t.states[0] for t in test])
    rng = make_rng(cfg.seed, "analysis/chaos/twins")
    twins = starts + acfg.pair_offset * random_directions(rng, starts.shape[0], starts.shape[1]) * scale
    n_steps = len(test[0])
    return rollout_trajectories(field, np.concatenate([starts, twins]), test[0].dt, n_steps, acfg.substeps)


def cmd_analyze_chaos(
    cfg: PipelineConfig, out: Optional[PathLike] = None, label: str = SMOOTH, dry_run: bool = False,
    command_line: Optional[Sequence[str]] = None,
) -> Dict[str, Any]:
    """Coverage rates, regular/chaotic split, near-pair divergence and equilibrium distances"""
    label = check_label(label)
    with stage_run(cfg, out, "analyze-chaos", f"chaos/{label}", label, dry_run, command_line) as run:
        run.require(f"embed/{label}")
        run.require(f"field/{label}")
        has_equilibria = manifest_path(run.root, f"equilibria/{label}").exists()
        if has_equilibria:
            run.require(f"equilibria/{label}")
        if dry_run:
            return run.dry()

        test = _encoded(run.layout, label)["test"]
        dt = test[0].dt
        scale = data_range(np.concatenate([t.states for t in test]))
        if cfg.analysis.chaos_source == "field":
            field = load_field(run.layout.field(label) / "checkpoint.json")
            trajectories = chaos_trajectories(field, test, cfg, scale)
        else:
            trajectories = [t.states for t in test]
        v_eq = _stable_equilibrium(run.layout, label) if has_equilibria else None

        report = chaos_report(trajectories, cfg.analysis, dt, v_eq, scale, derive_seed(cfg.seed, "analysis/kmeans"))
        if v_eq is None:
            report.note = "; ".join(filter(None, [report.note, "no stable equilibrium; histograms omitted"]))

        target = run.fresh_dir(run.layout.analysis(label) / "chaos")
        JSONExporter.export(report, target / "report.json")
        CSVExporter.export_frame(
            pd.DataFrame({"trajectory": np.arange(len(report.rates)), "rate": report.rates, "class": report.classes}),
            target / "rates.csv",
        )
        if report.divergence_curves:
            curves = np.asarray(report.divergence_curves)
            frame = pd.DataFrame({
                "pair": np.repeat(np.arange(curves.shape[0]), curves.shape[1]),
                "t": np.tile(dt * np.arange(curves.shape[1]), curves.shape[0]),
                "divergence": curves.ravel(),
            })
            CSVExporter.export_frame(frame, target / "divergence.csv")
        if report.histogram_edges:
            edges = np.asarray(report.histogram_edges)
            frame = pd.DataFrame({"low": edges[:-1], "high": edges[1:]})
            for cls, counts in report.histograms.items():
                frame[cls] = counts
            CSVExporter.export_frame(frame, target / "histogram.csv")
        run.log.report_written(target / "report.json")
        return run.finish(
            [target], chaotic=report.classes.count("chaotic"), regular=report.classes.count("regular")
        )


def cmd_analyze_cycles(
    cfg: PipelineConfig, out: Optional[PathLike] = None, label: str = SMOOTH, dry_run: bool = False,
    command_line: Optional[Sequence[str]] = None,
) -> Dict[str, Any]:
    """Long field rollouts from every test start, checked for a limit cycle"""
    label = check_label(label)
    with stage_run(cfg, out, "analyze-cycles", f"cycles/{label}", label, dry_run, command_line) as run:
        run.require(f"embed/{label}")
        run.require(f"field/{label}")
        if dry_run:
            return run.dry()

        acfg = cfg.analysis
        field = load_field(run.layout.field(label) / "checkpoint.json")
        test = _encoded(run.layout, label)["test"]
        dt = test[0].dt
        starts = np.stack([t.states[0] for t in test])
        states, diverged = integrate_many(field, starts, dt, acfg.cycle_steps, acfg.substeps)

        reports = [
            detect_limit_cycle(
                states[i], dt, acfg.transient_fraction, acfg.annulus_ratio, acfg.recurrence_tolerance,
                acfg.recurrence_fraction, acfg.min_periods,
            )
            for i in range(states.shape[0]) if not diverged[i]
        ]
        periods = [r.period for r in reports if r.detected]
        fraction = len(periods) / len(reports) if reports else 0.0
        summary = LimitCycleSummary(
            trajectories=reports,
            diverged=int(diverged.sum()),
            detected_fraction=fraction,
            median_period=float(np.median(periods)) if periods else None,
            detected=fraction > 0.5,
        )
        target = run.fresh_dir(run.layout.analysis(label) / "cycles")
        JSONExporter.export(summary, target / "report.json")
        run.log.report_written(target / "report.json")
        return run.finish([target], detected=summary.detected, median_period=summary.median_period)


def cmd_synthesize(
    cfg: PipelineConfig, out: Optional[PathLike] = None, label: str = SMOOTH, dry_run: bool = False,
    command_line: Optional[Sequence[str]] = None,
) -> Dict[str, Any]:
    """Damped rollouts towards the stable equilibrium for every damping factor"""
    label = check_label(label)
    with stage_run(cfg, out, "synthesize", f"synthesis/{label}", label, dry_run, command_line) as run:
        run.require(f"embed/{label}")
        run.require(f"field/{label}")
        run.require(f"equilibria/{label}")
        v_eq = _stable_equilibrium(run.layout, label)
        if v_eq is None:
            raise DegenerateInputError(f"run '{label}' has no stable equilibrium to damp towards", field="equilibria")
        if dry_run:
            return run.dry()

        acfg = cfg.analysis
        field = load_field(run.layout.field(label) / "checkpoint.json")
        test = _encoded(run.layout, label)["test"]
        dt_out = test[0].dt * acfg.synthesis_dt_factor
        scale = data_range(np.concatenate([t.states for t in test]))
        starts = np.stack([t.states[0] for t in test[: acfg.synthesis_count]])

        rollouts = synthesize(field, v_eq, starts, acfg.gammas, dt_out, acfg.synthesis_steps, acfg.substeps)
        report = synthesis_report(rollouts, v_eq, dt_out, scale)
        target = run.fresh_dir(run.layout.analysis(label) / "synthesis")
        for gamma, states in rollouts.items():
            CSVExporter.export_frame(_long_table(states, dt_out), target / f"gamma_{gamma:g}.csv", {"gamma": gamma})
        JSONExporter.export(report, target / "report.json")
        run.log.report_written(target / "report.json")
        return run.finish([target], monotone=report.monotone)


# ============================================================================
# Composite commands
# ============================================================================

def cmd_baseline(
    cfg: PipelineConfig, out: Optional[PathLike] = None, dry_run: bool = False,
    command_line: Optional[Sequence[str]] = None,
) -> Dict[str, Any]:
    """Embedding, field and equilibria with the regularizers off, same seed"""
    results = {"train-embed": cmd_train_embed(cfg, out, BASELINE, dry_run, command_line)}
    if dry_run:
        return results
    results["train-field"] = cmd_train_field(cfg, out, BASELINE, dry_run, command_line)
    results["analyze-equilibria"] = cmd_analyze_equilibria(cfg, out, BASELINE, dry_run, command_line)
    return results


def cmd_compare_smoothness(
    cfg: PipelineConfig, out: Optional[PathLike] = None, labels: Sequence[str] = (SMOOTH, BASELINE),
    dry_run: bool = False, command_line: Optional[Sequence[str]] = None,
) -> Dict[str, Any]:
    """Smoothness table of the encoded test trajectories of several runs"""
    with stage_run(cfg, out, "compare-smoothness", "smoothness", dry_run=dry_run, command_line=command_line) as run:
        for label in labels:
            run.require(f"embed/{check_label(label)}")
        if dry_run:
            return run.dry()

        groups = {}
        dt = None
        for label in labels:
            test = _encoded(run.layout, label)["test"]
            groups[label] = [t.states for t in test]
            dt = test[0].dt
        table = smoothness_table(groups, dt)
        medians = {
            metric: {row["label"]: row["median"] for _, row in part.iterrows()}
            for metric, part in table.groupby("metric", sort=True)
        }
        target = run.fresh_dir(run.layout.smoothness)
        CSVExporter.export_frame(table, target / "table.csv")
        JSONExporter.export({"labels": list(labels), "medians": medians}, target / "summary.json")
        run.log.report_written(target / "summary.json")
        return run.finish([target], medians=medians)


def cmd_pipeline(
    cfg: PipelineConfig, out: Optional[PathLike] = None, dry_run: bool = False,
    command_line: Optional[Sequence[str]] = None,
) -> Dict[str, Any]:
    """Every stage for the smooth run, then the baseline and the smoothness comparison"""
    if dry_run:
        return {"simulate": cmd_simulate(cfg, out, dry_run=True, command_line=command_line)}
    results: Dict[str, Any] = {
        "simulate": cmd_simulate(cfg, out, command_line=command_line),
        "estimate-dim": cmd_estimate_dim(cfg, out, command_line=command_line),
        "train-embed": cmd_train_embed(cfg, out, SMOOTH, command_line=command_line),
        "train-field": cmd_train_field(cfg, out, SMOOTH, command_line=command_line),
        "analyze-equilibria": cmd_analyze_equilibria(cfg, out, SMOOTH, command_line=command_line),
        "analyze-chaos": cmd_analyze_chaos(cfg, out, SMOOTH, command_line=command_line),
        "analyze-cycles": cmd_analyze_cycles(cfg, out, SMOOTH, command_line=command_line),
    }
    if results["analyze-equilibria"]["stable"]:
        results["synthesize"] = cmd_synthesize(cfg, out, SMOOTH, command_line=command_line)
    else:
        logger.warning("No stable equilibrium; skipping synthesis")
    results["baseline"] = cmd_baseline(cfg, out, command_line=command_line)
    results["compare-smoothness"] = cmd_compare_smoothness(cfg, out, command_line=command_line)
    return results
