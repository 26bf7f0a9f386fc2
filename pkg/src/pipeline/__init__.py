"""
Pipeline orchestration: run layout, manifests, event log and commands
"""

from .ablation import AblationReport, Comparison, horizon_no_worse, run_ablations
from .layout import RunLayout, check_label
from .provenance import RunManifest, hash_artifacts, load_manifest, manifest_path, verify_stage, write_manifest
from .run_log import RunEventType, RunLog
from .runner import (
    BASELINE,
    SMOOTH,
    StageRun,
    cmd_analyze_chaos,
    cmd_analyze_cycles,
    cmd_analyze_equilibria,
    cmd_baseline,
    cmd_compare_smoothness,
    cmd_estimate_dim,
    cmd_pipeline,
    cmd_simulate,
    cmd_synthesize,
    cmd_train_embed,
    cmd_train_field,
    embed_config_for,
    resolve_latent_dim,
    stage_run,
)

__all__ = [
    "RunLayout",
    "check_label",
    "RunManifest",
    "hash_artifacts",
    "write_manifest",
    "load_manifest",
    "manifest_path",
    "verify_stage",
    "RunEventType",
    "RunLog",
    "SMOOTH",
    "BASELINE",
    "StageRun",
    "stage_run",
    "embed_config_for",
    "resolve_latent_dim",
    "cmd_simulate",
    "cmd_estimate_dim",
    "cmd_train_embed",
    "cmd_train_field",
    "cmd_analyze_equilibria",
    "cmd_analyze_chaos",
    "cmd_analyze_cycles",
    "cmd_synthesize",
    "cmd_baseline",
    "cmd_pipeline",
    "cmd_compare_smoothness",
    "AblationReport",
    "Comparison",
    "run_ablations",
    "horizon_no_worse",
]
