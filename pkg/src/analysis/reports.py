"""
Analysis report models
Structured results of the equilibrium, stability, chaos, limit-cycle and
synthesis analyses. Every model serializes through JSONExporter.
"""

from typing import Dict, List, Optional

from pydantic import BaseModel, Field


class StabilityResult(BaseModel):
    """Lyapunov check outcome over every radius in the epsilon set"""

    stable: bool
    passed: Dict[str, bool] = Field(default_factory=dict, description="Keyed by epsilon as text")
    certified_radius: Dict[str, Optional[float]] = Field(default_factory=dict)
    diverged_samples: int = 0


class EquilibriumReport(BaseModel):
    v_eq: List[float]
    stable: bool
    stability: StabilityResult
    residual: float
    source: str = Field(description="data, grid or tail")
    newton_iterations: int
    jacobian: List[List[float]]
    eigenvalues: Optional[List[List[float]]] = Field(None, description="[re, im] pairs sorted by (re, im)")
    frequencies: List[float] = Field(default_factory=list)
    note: str = ""
    decoded_state: Optional[List[float]] = None
    ground_truth_error: Optional[List[float]] = None


class EquilibriumSearchReport(BaseModel):
    label: str = "smooth"
    equilibria: List[EquilibriumReport] = Field(default_factory=list)
    n_candidates: Dict[str, int] = Field(default_factory=dict)
    n_converged: int = 0
    n_rejected_outside: int = 0
    n_merged: int = 0
    data_low: List[float] = Field(default_factory=list)
    data_high: List[float] = Field(default_factory=list)
    reference_frequencies: List[float] = Field(default_factory=list, description="Linearization of the simulated system")
    note: str = ""

    def stable(self) -> List[EquilibriumReport]:
        return [e for e in self.equilibria if e.stable]


class ChaosReport(BaseModel):
    rates: List[float]
    classes: List[str]
    centroids: Optional[List[float]] = None
    threshold: Optional[float] = None
    pairs: List[List[int]] = Field(default_factory=list)
    pair_classes: List[str] = Field(default_factory=list)
    final_divergence: Dict[str, Optional[float]] = Field(default_factory=dict)
    mean_distance: Dict[str, Optional[float]] = Field(default_factory=dict)
    histogram_edges: List[float] = Field(default_factory=list)
    histograms: Dict[str, List[int]] = Field(default_factory=dict)
    divergence_curves: List[List[float]] = Field(default_factory=list, exclude=True)
    note: str = ""


class LimitCycleReport(BaseModel):
    status: str = Field(description="detected, not_detected or inconclusive")
    detected: bool
    period: Optional[float] = None
    mean_radius: Optional[float] = None
    transient_length: int = 0
    recurrence_residual: Optional[float] = None
    note: str = ""


class SynthesisReport(BaseModel):
    gammas: List[float]
    dt: float
    n_steps: int
    n_initial: int
    terminal_distance: Dict[str, Optional[float]] = Field(default_factory=dict)
    diverged: Dict[str, int] = Field(default_factory=dict)
    monotone: bool = True


class LimitCycleSummary(BaseModel):
    trajectories: List[LimitCycleReport] = Field(default_factory=list)
    diverged: int = 0
    detected_fraction: float = 0.0
    median_period: Optional[float] = None
    detected: bool = False
