"""
Ground-truth dynamics
Derivative functions, energies and analytic frequencies of the simulated
systems, plus the registry the rest of the toolkit looks systems up in.

Every derivative accepts a single state of shape (dim,) or a batch of shape
(..., dim) and returns an array of the same shape.
"""

import logging
import math
from dataclasses import dataclass
from typing import Any, Callable, Dict, Optional, Sequence, Tuple, Type

import numpy as np
from pydantic import BaseModel, ValidationError

from src.utils.errors import ConfigurationError, DimensionError, SingularMatrixError
from src.utils.helpers import as_batch
from .params import DoublePendulumParams, HopfParams, PendulumParams, SpringMassParams

logger = logging.getLogger(__name__)

# Condition number above which the double-pendulum mass matrix counts as singular
MASS_MATRIX_COND_LIMIT = 1e12


# ============================================================================
# Derivatives
# ============================================================================

def spring_mass_deriv(state: Any, p: SpringMassParams) -> np.ndarray:
    """(x, v) -> (v, -(k/m) x)"""
    s = as_batch(state, 2, "spring-mass state")
    x, v = s[..., 0], s[..., 1]
    return np.stack([v, -(p.spring_constant / p.mass) * x], axis=-1)


def single_pendulum_deriv(state: Any, p: PendulumParams) -> np.ndarray:
    """(theta, omega) -> (omega, -(3g/2L) sin theta)"""
    s = as_batch(state, 2, "pendulum state")
    theta, omega = s[..., 0], s[..., 1]
    return np.stack([omega, -(3.0 * p.gravity / (2.0 * p.length)) * np.sin(theta)], axis=-1)


def _double_pendulum_terms(p: DoublePendulumParams) -> Tuple[float, float, float, float, float]:
    a = 0.25 * p.m1 * p.l1 ** 2 + p.m2 * p.l1 ** 2 + p.inertia1
    b = 0.25 * p.m2 * p.l2 ** 2 + p.inertia2
    c = 0.5 * p.m2 * p.l1 * p.l2
    g1 = (0.5 * p.m1 + p.m2) * p.gravity * p.l1
    g2 = 0.5 * p.m2 * p.gravity * p.l2
    return a, b, c, g1, g2


def double_pendulum_deriv(state: Any, p: DoublePendulumParams) -> np.ndarray:
    """
    Equations of motion of the double rod pendulum

    Solves M(theta1 - theta2) (dOmega1, dOmega2) = rhs with
    M = [[A, C cos D], [C cos D, B]] and
    rhs = (-C sin D Omega2^2 - G1 sin theta1, C sin D Omega1^2 - G2 sin theta2).

    Args:
        state: (theta1, theta2, Omega1, Omega2), single or batched
        p: Physical parameters

    Returns:
        (Omega1, Omega2, dOmega1, dOmega2)

    Raises:
        SingularMatrixError: If the mass matrix is numerically singular
    """
    s = as_batch(state, 4, "double-pendulum state")
    th1, th2, om1, om2 = s[..., 0], s[..., 1], s[..., 2], s[..., 3]
    a, b, c, g1, g2 = _double_pendulum_terms(p)

    delta = th1 - th2
    m12 = c * np.cos(delta)
    det = a * b - m12 * m12

    half_trace = 0.5 * (a + b)
    spread = np.sqrt((0.5 * (a - b)) ** 2 + m12 * m12)
    lam_min = half_trace - spread
    if np.any(lam_min <= 0) or np.any((half_trace + spread) / lam_min > MASS_MATRIX_COND_LIMIT):
        logger.error("Double pendulum mass matrix is singular")
        raise SingularMatrixError("double pendulum mass matrix is numerically singular")

    sin_d = np.sin(delta)
    rhs1 = -c * sin_d * om2 ** 2 - g1 * np.sin(th1)
    rhs2 = c * sin_d * om1 ** 2 - g2 * np.sin(th2)

    dom1 = (b * rhs1 - m12 * rhs2) / det
    dom2 = (a * rhs2 - m12 * rhs1) / det
    return np.stack([om1, om2, dom1, dom2], axis=-1)


def hopf_deriv(state: Any, p: HopfParams) -> np.ndarray:
    """Hopf normal form in (x, y) with an attracting z = 0 plane"""
    s = as_batch(state, 3, "hopf state")
    x, y, z = s[..., 0], s[..., 1], s[..., 2]
    r2 = x * x + y * y
    dx = p.mu * x - p.omega * y - p.stiffness * x * r2
    dy = p.omega * x + p.mu * y - p.stiffness * y * r2
    return np.stack([dx, dy, -z], axis=-1)


# ============================================================================
# Energies
# ============================================================================

def spring_mass_energy(state: Any, p: SpringMassParams) -> np.ndarray:
    s = as_batch(state, 2, "spring-mass state")
    return 0.5 * p.mass * s[..., 1] ** 2 + 0.5 * p.spring_constant * s[..., 0] ** 2


def single_pendulum_energy(state: Any, p: PendulumParams) -> np.ndarray:
    s = as_batch(state, 2, "pendulum state")
    inertia = p.mass * p.length ** 2 / 3.0
    return 0.5 * inertia * s[..., 1] ** 2 - 0.5 * p.mass * p.gravity * p.length * np.cos(s[..., 0])


def double_pendulum_energy(state: Any, p: DoublePendulumParams) -> np.ndarray:
    """
    Kinetic plus potential energy, zero with both arms horizontal

    Args:
        state: (theta1, theta2, Omega1, Omega2), single or batched
        p: Physical parameters

    Returns:
        Energy in joules
    """
    s = as_batch(state, 4, "double-pendulum state")
    th1, th2, om1, om2 = s[..., 0], s[..., 1], s[..., 2], s[..., 3]
    a, b, c, g1, g2 = _double_pendulum_terms(p)
    kinetic = 0.5 * a * om1 ** 2 + 0.5 * b * om2 ** 2 + c * om1 * om2 * np.cos(th1 - th2)
    potential = -g1 * np.cos(th1) - g2 * np.cos(th2)
    return kinetic + potential


# ============================================================================
# Registry
# ============================================================================

@dataclass(frozen=True)
class SystemSpec:
    """Static description of a ground-truth system"""

    name: str
    state_dim: int
    params_model: Type[BaseModel]
    deriv: Callable[[Any, Any], np.ndarray]
    state_names: Tuple[str, ...]
    angle_indices: Tuple[int, ...]
    feature_scales: Tuple[float, ...]
    default_low: Tuple[float, ...]
    default_high: Tuple[float, ...]
    intrinsic_dim: int
    energy: Optional[Callable[[Any, Any], np.ndarray]] = None

    @property
    def equilibrium(self) -> np.ndarray:
        return np.zeros(self.state_dim)


SYSTEMS: Dict[str, SystemSpec] = {
    "spring_mass": SystemSpec(
        name="spring_mass",
        state_dim=2,
        params_model=SpringMassParams,
        deriv=spring_mass_deriv,
        state_names=("x", "v"),
        angle_indices=(),
        feature_scales=(0.15, 1.3),
        default_low=(-0.1, -0.9),
        default_high=(0.1, 0.9),
        intrinsic_dim=2,
        energy=spring_mass_energy,
    ),
    "single_pendulum": SystemSpec(
        name="single_pendulum",
        state_dim=2,
        params_model=PendulumParams,
        deriv=single_pendulum_deriv,
        state_names=("theta", "omega"),
        angle_indices=(0,),
        feature_scales=(1.0, 3.0),
        default_low=(-0.5, -1.0),
        default_high=(0.5, 1.0),
        intrinsic_dim=2,
        energy=single_pendulum_energy,
    ),
    "double_pendulum": SystemSpec(
        name="double_pendulum",
        state_dim=4,
        params_model=DoublePendulumParams,
        deriv=double_pendulum_deriv,
        state_names=("theta1", "theta2", "omega1", "omega2"),
        angle_indices=(0, 1),
        feature_scales=(1.0, 1.0, 20.0, 20.0),
        default_low=(-2.0, -2.0, -1.0, -1.0),
        default_high=(2.0, 2.0, 1.0, 1.0),
        intrinsic_dim=4,
        energy=double_pendulum_energy,
    ),
    "hopf": SystemSpec(
        name="hopf",
        state_dim=3,
        params_model=HopfParams,
        deriv=hopf_deriv,
        state_names=("x", "y", "z"),
        angle_indices=(),
        feature_scales=(1.0, 1.0, 1.0),
        default_low=(-1.0, -1.0, -0.5),
        default_high=(1.0, 1.0, 0.5),
        intrinsic_dim=3,
    ),
}


def get_system(name: str) -> SystemSpec:
    """Look up a system by name"""
    try:
        return SYSTEMS[name]
    except KeyError:
        raise ConfigurationError(f"Unknown system '{name}'", field="system.name") from None


def resolve_params(name: str, overrides: Optional[Dict[str, float]] = None) -> BaseModel:
    """
    Build the parameter model of a system from defaults plus overrides

    Raises:
        ConfigurationError: Naming the offending parameter
    """
    spec = get_system(name)
    try:
        return spec.params_model(**(overrides or {}))
    except ValidationError as e:
        err = e.errors()[0]
        loc = ".".join(str(part) for part in err.get("loc", ()))
        raise ConfigurationError(
            f"system.params.{loc}: {err.get('msg', 'invalid value')}", field=f"system.params.{loc}"
        ) from e


def make_deriv(name: str, params: BaseModel) -> Callable[[np.ndarray], np.ndarray]:
    """Bind a system's derivative to its parameters"""
    spec = get_system(name)
    return lambda state: spec.deriv(state, params)


# ============================================================================
# Linearization and sampling
# ============================================================================

def numerical_jacobian(f: Callable[[np.ndarray], np.ndarray], x: np.ndarray, h: float = 1e-6) -> np.ndarray:
    """Central-difference Jacobian of a batched vector function"""
    x = np.asarray(x, dtype=np.float64)
    n = x.shape[0]
    offsets = np.eye(n) * h
    forward = f(x[None, :] + offsets)
    backward = f(x[None, :] - offsets)
    return ((forward - backward) / (2.0 * h)).T


def linear_frequencies(system: str, params: BaseModel) -> list:
    """
    Natural frequencies (rad/s) of the linearization at the stable equilibrium

    Args:
        system: System name
        params: Its parameter model

    Returns:
        Frequencies sorted descending
    """
    if system == "spring_mass":
        return [math.sqrt(params.spring_constant / params.mass)]
    if system == "single_pendulum":
        return [math.sqrt(3.0 * params.gravity / (2.0 * params.length))]
    if system == "hopf":
        return [abs(params.omega)]
    if system == "double_pendulum":
        jac = numerical_jacobian(lambda s: double_pendulum_deriv(s, params), np.zeros(4))
        eigs = np.linalg.eigvals(jac)
        freqs = sorted({round(float(abs(e.imag)), 12) for e in eigs if e.imag > 1e-9}, reverse=True)
        return freqs
    raise ConfigurationError(f"Unknown system '{system}'", field="system.name")


def initial_box(
    system: str,
    low: Optional[Sequence[float]] = None,
    high: Optional[Sequence[float]] = None,
) -> Tuple[np.ndarray, np.ndarray]:
    """
    Resolve and check the initial-state box of a system

    Args:
        system: System name
        low: Lower corner; system default when None
        high: Upper corner; system default when None

    Returns:
        (low, high) corners

    Raises:
        ConfigurationError: If the box is empty
        DimensionError: If a corner has the wrong length
    """
    spec = get_system(system)
    lo = np.asarray(spec.default_low if low is None else low, dtype=np.float64)
    hi = np.asarray(spec.default_high if high is None else high, dtype=np.float64)
    if lo.shape != (spec.state_dim,) or hi.shape != (spec.state_dim,):
        raise DimensionError(
            f"amplitude range for {system} must have length {spec.state_dim}", field="system.amplitude_low"
        )
    if np.any(lo > hi):
        raise ConfigurationError("amplitude range is empty (low > high)", field="system.amplitude_low")
    return lo, hi


def check_params(system: str, params: Optional[BaseModel]) -> BaseModel:
    """Default parameters when None; otherwise the system's own parameter model"""
    spec = get_system(system)
    if params is None:
        return spec.params_model()
    if not isinstance(params, spec.params_model):
        raise ConfigurationError(
            f"{system} expects {spec.params_model.__name__}, got {type(params).__name__}", field="system.params"
        )
    return params


def sample_initial_state(
    system: str,
    params: Optional[BaseModel],
    seed: int,
    low: Optional[Sequence[float]] = None,
    high: Optional[Sequence[float]] = None,
) -> np.ndarray:
    """
    Draw an initial state uniformly from a box

    Args:
        system: System name
        params: Parameter model of the system; defaults when None
        seed: Seed of this draw
        low: Lower corner; system default when None
        high: Upper corner; system default when None

    Returns:
        State vector

    Raises:
        ConfigurationError: If the box is empty or params belong to another system
        DimensionError: If a corner has the wrong length
    """
    check_params(system, params)
    lo, hi = initial_box(system, low, high)
    rng = np.random.default_rng(seed)
    return lo + (hi - lo) * rng.random(lo.shape[0])
