"""
Ground-truth dynamical systems
"""

from .dynamics import (
    SYSTEMS,
    SystemSpec,
    double_pendulum_deriv,
    double_pendulum_energy,
    get_system,
    hopf_deriv,
    initial_box,
    linear_frequencies,
    make_deriv,
    resolve_params,
    sample_initial_state,
    single_pendulum_deriv,
    spring_mass_deriv,
)
from .integrator import integrate_batch_masked, integrate_fixed_step, rk4_step
from .params import DoublePendulumParams, HopfParams, PendulumParams, SpringMassParams
from .trajectory import Trajectory, simulate

__all__ = [
    "SYSTEMS",
    "SystemSpec",
    "SpringMassParams",
    "PendulumParams",
    "DoublePendulumParams",
    "HopfParams",
    "Trajectory",
    "spring_mass_deriv",
    "single_pendulum_deriv",
    "double_pendulum_deriv",
    "double_pendulum_energy",
    "hopf_deriv",
    "linear_frequencies",
    "initial_box",
    "sample_initial_state",
    "simulate",
    "get_system",
    "resolve_params",
    "make_deriv",
    "rk4_step",
    "integrate_fixed_step",
    "integrate_batch_masked",
]
