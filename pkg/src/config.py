"""
Configuration Module
Centralizes all configuration settings for the NSV toolkit.

Application-level settings live on ``Config`` and are read from the
environment (an optional ``.env`` file is loaded first). Run settings live in
a single JSON document validated by ``PipelineConfig``.
"""

import json
import os
from pathlib import Path
from typing import Any, Dict, List, Literal, Optional

from dotenv import load_dotenv
from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator, model_validator

from src.utils.errors import ConfigurationError, MissingArtifactError

load_dotenv()


class Config:
    """Main configuration class"""

    # Application
    APP_NAME = "NSV - Neural State Variable Toolkit"
    APP_VERSION = "1.0.0"
    FORMAT_VERSION = 1

    # Environment
    LOG_LEVEL = os.getenv("NSV_LOG_LEVEL", "INFO").upper()
    OUTPUT_DIR = os.getenv("NSV_OUTPUT_DIR", "./runs")
    WORKERS = max(1, int(os.getenv("NSV_WORKERS", "1")))

    # Observation lift
    OBSERVATION_DIM = 64


class _Section(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)


# ============================================================================
# Data generation
# ============================================================================

class SystemConfig(_Section):
    name: Literal["spring_mass", "single_pendulum", "double_pendulum", "hopf"] = Field(
        "spring_mass", description="Ground-truth system to simulate"
    )
    params: Dict[str, float] = Field(
        default_factory=dict,
        description="Overrides for the system's physical parameters; unset names keep their defaults",
    )
    amplitude_low: Optional[List[float]] = Field(
        None, description="Lower corner of the initial-state box; system default when unset"
    )
    amplitude_high: Optional[List[float]] = Field(
        None, description="Upper corner of the initial-state box; system default when unset"
    )
    substeps: int = Field(10, ge=1, description="Internal RK4 steps per output sample")


class DatasetConfig(_Section):
    n_train: int = Field(96, ge=1, description="Training sequences")
    n_val: int = Field(12, ge=1, description="Validation sequences")
    n_test: int = Field(12, ge=1, description="Test sequences")
    seq_len: int = Field(60, ge=2, description="Samples per sequence")
    dt: float = Field(1.0 / 60.0, gt=0, description="Sampling interval in seconds")


class LiftConfig(_Section):
    output_dim: int = Field(Config.OBSERVATION_DIM, ge=2, description="Observation dimension D")
    angle_features: Optional[bool] = Field(
        None, description="Feed angles as (sin, cos) pairs; on for pendulums when unset"
    )


class DimensionConfig(_Section):
    k_min: int = Field(10, ge=3, description="Smallest neighbor count")
    k_max: int = Field(20, ge=3, description="Largest neighbor count")
    max_points: int = Field(
        5000, ge=10, description="Independent frames drawn, or the subsample cap on a dataset split"
    )
    source: Literal["frames", "dataset"] = Field(
        "frames", description="Independent frames of fresh sequences, or the stored frames of one split"
    )
    split: Literal["train", "val", "test", "all"] = Field("test", description="Split used by the dataset source")

    @model_validator(mode="after")
    def _check_range(self) -> "DimensionConfig":
        if self.k_max < self.k_min:
            raise ValueError("k_max must be >= k_min")
        return self


# ============================================================================
# Training
# ============================================================================

class SinkhornConfig(_Section):
    blur: float = Field(0.05, gt=0, description="Entropic regularization epsilon")
    max_iter: int = Field(1000, ge=1, description="Maximum Sinkhorn iterations")
    tolerance: float = Field(1e-9, gt=0, description="Marginal-violation stopping threshold")
    debiased: bool = Field(True, description="Use the debiased divergence instead of raw entropic OT")


class EmbedConfig(_Section):
    intrinsic_dim: Optional[int] = Field(
        None, ge=1, le=4, description="Latent dimension d; taken from the dimension estimate when unset"
    )
    w_reconstruct: float = Field(1.0, ge=0, description="Reconstruction weight")
    w_smooth: float = Field(1.0, ge=0, description="Smoothness weight")
    w_space: float = Field(0.1, ge=0, description="Space-filling weight")
    l0: Optional[float] = Field(
        None, gt=0, description="Smoothness threshold L0; 2*sqrt(d)/seq_len when unset"
    )
    eta: Literal[0, 1] = Field(1, description="Penalize the one-step gap as well")
    distance_mode: Literal["box", "torus"] = Field("box", description="Distance used by the smoothness loss")
    beta_cycle: int = Field(2000, ge=1, description="Steps per annealing cycle")
    beta_zero_fraction: float = Field(0.25, ge=0, le=1, description="Cycle share with beta=0")
    beta_ramp_fraction: float = Field(0.25, ge=0, le=1, description="Cycle share of the linear ramp")
    beta_hold_fraction: float = Field(0.5, ge=0, le=1, description="Cycle share with beta=1")
    anneal: bool = Field(True, description="Use the cyclic schedule; False fixes beta=0")
    sinkhorn: SinkhornConfig = Field(default_factory=SinkhornConfig)
    batch_size: int = Field(64, ge=1, description="Triplets per step")
    steps: int = Field(4000, ge=1, description="Optimizer steps")
    learning_rate: float = Field(1e-3, gt=0, description="Adam learning rate")
    eval_every: int = Field(100, ge=1, description="Validation interval in steps")
    omega0: float = Field(30.0, gt=0, description="Sine-layer frequency scale")

    @model_validator(mode="after")
    def _check_schedule(self) -> "EmbedConfig":
        total = self.beta_zero_fraction + self.beta_ramp_fraction + self.beta_hold_fraction
        if total > 1.0 + 1e-12:
            raise ValueError("beta schedule fractions must sum to at most 1")
        return self

    def regularizers_off(self) -> "EmbedConfig":
        """Same configuration with w_smooth = w_space = 0"""
        return self.model_copy(update={"w_smooth": 0.0, "w_space": 0.0})


class FieldTrainConfig(_Section):
    mode: Literal["integrated", "finite_difference"] = Field("integrated", description="Training objective")
    substeps: int = Field(2, ge=1, description="RK4 steps per sample interval")
    filter: bool = Field(True, description="Drop trajectories with outlier steps before training")
    filter_percentile: float = Field(99.0, gt=0, le=100, description="Step-distance percentile threshold")
    rho_min: float = Field(0.1, gt=0, lt=1, description="Lower end of the horizon-weight cycle")
    rho_max: float = Field(0.9, gt=0, lt=1, description="Upper end of the horizon-weight cycle")
    rho_cycle: int = Field(1000, ge=1, description="Steps per horizon-weight cycle")
    batch_size: int = Field(8, ge=1, description="Trajectories per step")
    starts_per_trajectory: Optional[int] = Field(
        8, ge=1, description="Start indices sampled per trajectory; all starts when unset"
    )
    steps: int = Field(2000, ge=1, description="Optimizer steps")
    learning_rate: float = Field(1e-3, gt=0, description="Adam learning rate")
    eval_every: int = Field(100, ge=1, description="Validation interval in steps")
    validation_stride: int = Field(4, ge=1, description="Stride over start indices during validation")

    @model_validator(mode="after")
    def _check_rho(self) -> "FieldTrainConfig":
        if self.rho_max < self.rho_min:
            raise ValueError("rho_max must be >= rho_min")
        return self


# ============================================================================
# Analysis
# ============================================================================

class AnalysisConfig(_Section):
    n_candidates: int = Field(10, ge=1, description="C: candidates kept per source")
    n_grid: int = Field(10, ge=2, description="Grid points per dimension when d > 2")
    grid_cap: int = Field(10_000, ge=1, description="Maximum evaluated grid points")
    candidate_mode: Literal["data", "tail"] = Field(
        "data", description="'tail' adds one tail-averaged candidate per trajectory"
    )
    n_tail: int = Field(10, ge=1, description="States averaged per tail candidate")
    n_directions: int = Field(10, ge=1, description="n_d: random directions per radius")
    n_radii: int = Field(10, ge=1, description="n_e: radii per epsilon")
    horizon: int = Field(300, ge=2, description="T: samples per stability rollout")
    epsilons: List[float] = Field(
        default_factory=lambda: [0.005, 0.01, 0.03, 0.05, 0.1],
        description="E: stability radii as fractions of the data range",
    )
    require_half_radii: bool = Field(
        True, description="Require the certified radius to cover at least half of the sampled radii"
    )
    substeps: int = Field(2, ge=1, description="RK4 steps per sample interval for analysis rollouts")
    newton_max_iter: int = Field(100, ge=1, description="Newton iterations")
    newton_tol: float = Field(1e-8, gt=0, description="Newton residual tolerance")
    root_tol: float = Field(1e-6, gt=0, description="Residual below which a root is accepted")
    merge_radius: float = Field(0.01, gt=0, description="Root merge distance in range-scaled units")
    jacobian_method: Literal["analytic", "central_fd"] = Field("analytic", description="Jacobian evaluation")
    fd_step: float = Field(1e-4, gt=0, description="Central-difference step")
    frequency_tol: float = Field(1e-6, gt=0, description="|Im| below which an eigenvalue counts as real")
    coverage_bins: int = Field(10, ge=1, description="N: boxes per dimension for coverage")
    near_pair_fraction: float = Field(0.01, gt=0, description="Near-pair initial distance, range-scaled")
    pair_offset: float = Field(0.005, gt=0, description="Twin offset for field rollouts, range-scaled")
    chaos_source: Literal["field", "encoded"] = Field("field", description="Trajectories the chaos report uses")
    histogram_bins: int = Field(20, ge=1, description="Distance-to-equilibrium histogram bins")
    kmeans_restarts: int = Field(10, ge=1, description="k-means restarts")
    transient_fraction: float = Field(0.5, ge=0, lt=1, description="Leading share dropped before cycle detection")
    annulus_ratio: float = Field(0.25, gt=0, lt=1, description="Minimum/maximum radius ratio")
    recurrence_tolerance: float = Field(0.05, gt=0, description="Recurrence distance as share of mean radius")
    recurrence_fraction: float = Field(0.9, gt=0, le=1, description="Share of tail points that must recur")
    min_periods: int = Field(3, ge=1, description="Periods required in the tail")
    cycle_steps: int = Field(2000, ge=10, description="Field rollout length for cycle detection")
    gammas: List[float] = Field(default_factory=lambda: [0.0, 1.0, 2.0, 4.0], description="Damping factors")
    synthesis_steps: int = Field(300, ge=2, description="Samples per synthesized rollout")
    synthesis_dt_factor: float = Field(1.0, gt=0, description="Output dt as a multiple of the dataset dt")
    synthesis_count: int = Field(10, ge=1, description="Initial states per damping factor")
    near_eq_delta: float = Field(0.01, gt=0, description="Offset of near-equilibrium rollouts, range-scaled")
    near_eq_rollouts: int = Field(6, ge=1, description="Near-equilibrium rollouts")
    near_eq_steps: int = Field(120, ge=2, description="Samples per near-equilibrium rollout")

    @field_validator("epsilons")
    @classmethod
    def _positive_eps(cls, values: List[float]) -> List[float]:
        if not values or any(v <= 0 for v in values):
            raise ValueError("epsilons must be a non-empty list of positive values")
        return values

    @field_validator("gammas")
    @classmethod
    def _nonnegative_gamma(cls, values: List[float]) -> List[float]:
        if any(v < 0 for v in values):
            raise ValueError("gammas must be >= 0")
        return values


# ============================================================================
# Pipeline document
# ============================================================================

class PipelineConfig(_Section):
    format_version: int = Field(Config.FORMAT_VERSION, description="Config document version")
    seed: int = Field(0, ge=0, description="Global seed; every random stream derives from it")
    output_dir: str = Field(Config.OUTPUT_DIR, description="Run directory")
    system: SystemConfig = Field(default_factory=SystemConfig)
    dataset: DatasetConfig = Field(default_factory=DatasetConfig)
    lift: LiftConfig = Field(default_factory=LiftConfig)
    dimension: DimensionConfig = Field(default_factory=DimensionConfig)
    embed: EmbedConfig = Field(default_factory=EmbedConfig)
    field: FieldTrainConfig = Field(default_factory=FieldTrainConfig)
    analysis: AnalysisConfig = Field(default_factory=AnalysisConfig)

    @field_validator("format_version")
    @classmethod
    def _check_version(cls, value: int) -> int:
        if value != Config.FORMAT_VERSION:
            raise ValueError(f"format_version {value} is not supported (expected {Config.FORMAT_VERSION})")
        return value


def _first_error(exc: ValidationError) -> ConfigurationError:
    err = exc.errors()[0]
    loc = ".".join(str(part) for part in err.get("loc", ()))
    return ConfigurationError(f"{loc}: {err.get('msg', 'invalid value')}", field=loc or None)


def parse_pipeline_config(data: Dict[str, Any]) -> PipelineConfig:
    """
    Validate a config mapping

    Raises:
        ConfigurationError: Naming the first offending field
    """
    try:
        return PipelineConfig.model_validate(data)
    except ValidationError as e:
        raise _first_error(e) from e


def load_pipeline_config(path: Optional[str] = None) -> PipelineConfig:
    """
    Load a PipelineConfig from a JSON file, or the defaults when no path is given

    Raises:
        MissingArtifactError: If the file does not exist
        ConfigurationError: If the document is not valid
    """
    if path is None:
        return PipelineConfig()
    config_path = Path(path)
    if not config_path.exists():
        raise MissingArtifactError(f"Config file not found: {config_path}", field="config")
    try:
        data = json.loads(config_path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as e:
        raise ConfigurationError(f"Config is not valid JSON: {e}", field="config") from e
    if not isinstance(data, dict):
        raise ConfigurationError("Config document must be a JSON object", field="config")
    return parse_pipeline_config(data)


def config_schema() -> Dict[str, Any]:
    """JSON schema of the config document"""
    return PipelineConfig.model_json_schema()
