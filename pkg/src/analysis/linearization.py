"""
Linearization
Jacobians of vector fields, eigenvalues of small matrices and natural
frequencies of the linearized dynamics.
"""

import logging
from typing import Callable, List, Sequence

import numpy as np

from src.utils.errors import ConfigurationError, ConvergenceError, DimensionError

logger = logging.getLogger(__name__)

MAX_DIM = 4
_DK_MAX_ITER = 2000
_RESIDUAL_TOL = 1e-9
_REAL_SNAP = 1e-7


def jacobian_at(field: Callable, v: np.ndarray, method: str = "analytic", h: float = 1e-4) -> np.ndarray:
    """
    d x d Jacobian of a field at V

    Args:
        field: FieldModel, DampedField or any callable on (n, d) arrays
        v: State (d,)
        method: 'analytic' uses field.jacobian when the field has one,
            'central_fd' always differences
        h: Central-difference step

    Returns:
        J with J[i, j] = dF_i / dV_j
    """
    point = np.asarray(v, dtype=np.float64)
    if point.ndim != 1:
        raise DimensionError(f"V must be a vector, got shape {point.shape}")
    if method not in ("analytic", "central_fd"):
        raise ConfigurationError(f"unknown jacobian method '{method}'", field="analysis.jacobian_method")
    if method == "analytic" and hasattr(field, "jacobian"):
        return np.asarray(field.jacobian(point), dtype=np.float64)
    offsets = np.eye(point.shape[0]) * h
    plus = np.asarray(field(point[None, :] + offsets))
    minus = np.asarray(field(point[None, :] - offsets))
    return ((plus - minus) / (2.0 * h)).T


def characteristic_polynomial(matrix: np.ndarray) -> np.ndarray:
    """Monic coefficients [1, c1, ..., cd] by the Faddeev-LeVerrier recursion"""
    a = np.asarray(matrix, dtype=np.float64)
    d = a.shape[0]
    coeffs = np.zeros(d + 1)
    coeffs[0] = 1.0
    m = np.zeros_like(a)
    eye = np.eye(d)
    for k in range(1, d + 1):
        m = a @ m + coeffs[k - 1] * eye
        coeffs[k] = -np.trace(a @ m) / k
    return coeffs


def _horner(coeffs: np.ndarray, z: np.ndarray) -> np.ndarray:
    out = np.zeros_like(z, dtype=np.complex128)
    for c in coeffs:
        out = out * z + c
    return out


def _scale_of(coeffs: np.ndarray, z: np.ndarray) -> np.ndarray:
    """Magnitude reference for relative residuals"""
    return _horner(np.abs(coeffs), np.abs(z)).real


def _durand_kerner(coeffs: np.ndarray) -> np.ndarray:
    d = len(coeffs) - 1
    radius = 1.0 + float(np.max(np.abs(coeffs[1:])))
    z = radius * np.power(0.4 + 0.9j, np.arange(d))
    for _ in range(_DK_MAX_ITER):
        diff = z[:, None] - z[None, :]
        np.fill_diagonal(diff, 1.0)
        step = _horner(coeffs, z) / np.prod(diff, axis=1)
        z = z - step
        if np.all(np.abs(step) <= 1e-15 * (1.0 + np.abs(z))):
            break
    return z


def _polish(coeffs: np.ndarray, z: np.ndarray) -> np.ndarray:
    deriv = np.polyder(coeffs)
    out = z.copy()
    for i, root in enumerate(z):
        slope = _horner(deriv, np.array([root]))[0]
        if slope == 0:
            continue
        candidate = root - _horner(coeffs, np.array([root]))[0] / slope
        if abs(_horner(coeffs, np.array([candidate]))[0]) < abs(_horner(coeffs, np.array([root]))[0]):
            out[i] = candidate
    return out


def _pair_conjugates(z: np.ndarray) -> np.ndarray:
    roots = z.copy()
    near_real = np.abs(roots.imag) <= _REAL_SNAP * np.maximum(1.0, np.abs(roots))
    roots[near_real] = roots[near_real].real
    upper = [i for i in range(len(roots)) if roots[i].imag > 0]
    lower = [i for i in range(len(roots)) if roots[i].imag < 0]
    if len(upper) != len(lower):
        raise ConvergenceError("eigenvalues are not closed under conjugation", residuals=[])
    for i in upper:
        j = min(lower, key=lambda k: abs(roots[k] - np.conj(roots[i])))
        lower.remove(j)
        re = 0.5 * (roots[i].real + roots[j].real)
        im = 0.5 * (roots[i].imag - roots[j].imag)
        roots[i], roots[j] = complex(re, im), complex(re, -im)
    return roots


def eigenvalues_small(matrix: np.ndarray) -> List[complex]:
    """
    Eigenvalues of a real d x d matrix with d <= 4

    Roots of the characteristic polynomial by simultaneous (Durand-Kerner)
    iteration, each polished by one Newton step when that reduces its
    residual. Sorted by (re, im).

    Raises:
        DimensionError: If the matrix is not square or d > 4
        ConvergenceError: With the residuals when the iteration fails
    """
    a = np.asarray(matrix, dtype=np.float64)
    if a.ndim != 2 or a.shape[0] != a.shape[1] or not 1 <= a.shape[0] <= MAX_DIM:
        raise DimensionError(f"expected a square matrix of size 1..{MAX_DIM}, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ConvergenceError("matrix has non-finite entries", residuals=[])

    coeffs = characteristic_polynomial(a)
    if a.shape[0] == 1:
        roots = np.array([-coeffs[1] + 0j])
    else:
        roots = _polish(coeffs, _durand_kerner(coeffs))

    residuals = np.abs(_horner(coeffs, roots)) / np.maximum(_scale_of(coeffs, roots), 1e-300)
    if not np.all(np.isfinite(roots)) or np.any(residuals > _RESIDUAL_TOL):
        logger.error(f"Eigenvalue iteration failed, residuals {residuals.tolist()}")
        raise ConvergenceError("eigenvalue iteration did not converge", residuals=residuals.tolist())

    roots = _pair_conjugates(roots)
    return sorted((complex(r) for r in roots), key=lambda r: (r.real, r.imag))


def natural_frequencies(eigenvalues: Sequence[complex], tol: float = 1e-6) -> List[float]:
    """One |Im| per conjugate pair above the real tolerance, sorted descending"""
    return sorted((abs(complex(e).imag) for e in eigenvalues if complex(e).imag > tol), reverse=True)
