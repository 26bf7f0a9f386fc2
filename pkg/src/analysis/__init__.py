"""
Analysis of learned vector fields: equilibria, stability, linearization,
chaos, limit cycles, damped synthesis and smoothness
"""

from .chaos import (
    CHAOTIC,
    REGULAR,
    KMeansSplit,
    chaos_report,
    coverage_increase_rate,
    coverage_series,
    divergence_series,
    kmeans_2,
    rollout_trajectories,
)
from .equilibrium import (
    NewtonResult,
    field_norms,
    find_equilibria,
    grid_points,
    newton_solve,
    tail_average_candidates,
)
from .limit_cycle import detect_limit_cycle, recurrence_profile
from .linearization import characteristic_polynomial, eigenvalues_small, jacobian_at, natural_frequencies
from .reports import (
    ChaosReport,
    EquilibriumReport,
    EquilibriumSearchReport,
    LimitCycleReport,
    LimitCycleSummary,
    StabilityResult,
    SynthesisReport,
)
from .smoothness import METRICS, metric_name, set_range, smoothness_metric, smoothness_table
from .stability import certified_radius, check_stability, data_range, random_directions
from .synthesis import DampedField, damped_field, near_equilibrium_rollouts, synthesis_report, synthesize

__all__ = [
    "EquilibriumReport",
    "EquilibriumSearchReport",
    "StabilityResult",
    "ChaosReport",
    "LimitCycleReport",
    "LimitCycleSummary",
    "SynthesisReport",
    "NewtonResult",
    "newton_solve",
    "field_norms",
    "grid_points",
    "tail_average_candidates",
    "find_equilibria",
    "data_range",
    "random_directions",
    "certified_radius",
    "check_stability",
    "jacobian_at",
    "characteristic_polynomial",
    "eigenvalues_small",
    "natural_frequencies",
    "REGULAR",
    "CHAOTIC",
    "KMeansSplit",
    "divergence_series",
    "coverage_series",
    "coverage_increase_rate",
    "kmeans_2",
    "rollout_trajectories",
    "chaos_report",
    "recurrence_profile",
    "detect_limit_cycle",
    "DampedField",
    "damped_field",
    "synthesize",
    "synthesis_report",
    "near_equilibrium_rollouts",
    "METRICS",
    "metric_name",
    "smoothness_metric",
    "smoothness_table",
    "set_range",
]
