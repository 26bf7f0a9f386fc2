"""
Unit Tests for linearization, stability and equilibrium search
Run with: pytest tests/test_equilibria.py -v
"""

import numpy as np
import pytest

from src.analysis import (
    certified_radius,
    characteristic_polynomial,
    check_stability,
    data_range,
    eigenvalues_small,
    find_equilibria,
    grid_points,
    jacobian_at,
    natural_frequencies,
    newton_solve,
    tail_average_candidates,
)
from src.config import AnalysisConfig
from src.systems import integrate_fixed_step
from src.utils.errors import ConvergenceError, DimensionError

CENTER = np.array([0.1, -0.2])
DECAY = np.diag([-1.0, -2.0])


def linear_field(matrix, center=np.zeros(2)):
    """dV/dt = A (V - c) on (n, d) arrays"""
    return lambda v: (np.asarray(v) - center) @ matrix.T


def spd(rng, d, low=0.5, high=2.0):
    """Random symmetric matrix with eigenvalues in [low, high]."""
    q, _ = np.linalg.qr(rng.normal(size=(d, d)))
    return q @ np.diag(rng.uniform(low, high, d)) @ q.T


@pytest.fixture
def decaying_trajectories():
    """Six decays towards CENTER from the corners and edges of a box."""
    field = linear_field(DECAY, CENTER)
    starts = CENTER + np.array([[0.5, 0.5], [-0.5, 0.5], [0.5, -0.5], [-0.5, -0.5], [0.4, 0.0], [0.0, -0.4]])
    return integrate_fixed_step(field, starts, dt=0.05, n_steps=50, substeps=2)


@pytest.fixture
def search_config():
    return AnalysisConfig(n_candidates=3, n_directions=3, n_radii=4, horizon=60, epsilons=[0.05, 0.1])


# ============================================================================
# Linearization
# ============================================================================

class TestLinearization:
    """Test Jacobians, eigenvalues and frequencies."""

    def test_spring_eigenvalues(self):
        jac = np.array([[0.0, 1.0], [-80.0, 0.0]])
        np.testing.assert_allclose(characteristic_polynomial(jac), [1.0, 0.0, 80.0])
        eigs = eigenvalues_small(jac)
        assert eigs[0] == pytest.approx(complex(0, -np.sqrt(80)), abs=1e-9)
        assert eigs[1] == pytest.approx(complex(0, np.sqrt(80)), abs=1e-9)
        assert natural_frequencies(eigs) == pytest.approx([8.944], abs=1e-3)

    def test_diagonal(self):
        eigs = eigenvalues_small(np.diag([4.0, -1.0, 2.5, 0.5]))
        assert [e.real for e in eigs] == pytest.approx([-1.0, 0.5, 2.5, 4.0])
        assert all(e.imag == 0 for e in eigs)
        assert natural_frequencies(eigs) == []

    @pytest.mark.parametrize("seed", [0, 1, 2])
    def test_matches_dense_solver(self, seed):
        a = np.random.default_rng(seed).normal(size=(4, 4))
        expected = sorted(np.linalg.eigvals(a), key=lambda z: (z.real, z.imag))
        np.testing.assert_allclose(eigenvalues_small(a), expected, atol=1e-8)

    def test_similarity_invariance(self, rng):
        a = rng.normal(size=(3, 3))
        s = np.eye(3) + 0.3 * rng.normal(size=(3, 3))
        similar = s @ a @ np.linalg.inv(s)
        np.testing.assert_allclose(eigenvalues_small(similar), eigenvalues_small(a), atol=1e-8)

    def test_conjugates_are_exact(self):
        a = np.array([[-0.3, 2.0, 0.0], [-2.0, -0.3, 0.0], [0.0, 0.0, -1.0]])
        eigs = eigenvalues_small(a)
        complex_eigs = [e for e in eigs if e.imag != 0]
        assert complex_eigs[0] == complex_eigs[1].conjugate()

    def test_one_dimensional(self):
        assert eigenvalues_small(np.array([[-3.0]])) == [complex(-3.0, 0.0)]

    def test_too_large(self):
        with pytest.raises(DimensionError):
            eigenvalues_small(np.eye(5))

    def test_non_finite(self):
        with pytest.raises(ConvergenceError):
            eigenvalues_small(np.array([[np.nan, 0.0], [0.0, 1.0]]))

    def test_jacobian_by_differences(self):
        rotation = np.array([[0.0, -1.0], [1.0, 0.0]])
        jac = jacobian_at(linear_field(rotation), np.array([0.3, 0.4]))
        np.testing.assert_allclose(jac, rotation, atol=1e-10)

    def test_frequency_tolerance(self):
        assert natural_frequencies([complex(0, 1e-8), complex(0, -1e-8)]) == []
        assert natural_frequencies([complex(-1, 2), complex(-1, -2), complex(0, 5), complex(0, -5)]) == [5.0, 2.0]


# ============================================================================
# Stability
# ============================================================================

class TestStability:
    """Test the Lyapunov check against linear systems."""

    @pytest.mark.parametrize("d", [2, 3, 4])
    def test_contracting_system_is_stable(self, rng, d):
        field = linear_field(-spd(rng, d), np.zeros(d))
        result = check_stability(field, np.zeros(d), np.ones(d), dt=0.05, epsilons=[0.01, 0.05], horizon=300)
        assert result.stable
        assert set(result.passed) == {"0.01", "0.05"}
        assert result.certified_radius["0.05"] >= 0.025

    @pytest.mark.parametrize("d", [2, 3, 4])
    def test_expanding_system_is_unstable(self, rng, d):
        field = linear_field(spd(rng, d), np.zeros(d))
        result = check_stability(field, np.zeros(d), np.ones(d), dt=0.05, epsilons=[0.01, 0.05], horizon=300)
        assert not result.stable
        assert result.certified_radius["0.01"] is None

    @pytest.mark.slow
    def test_fifty_random_linear_systems(self):
        rng = np.random.default_rng(50)
        correct = 0
        for case in range(50):
            d = 2 + case % 3
            skew = rng.normal(size=(d, d))
            skew = skew - skew.T
            contracting = case % 2 == 0
            matrix = (-spd(rng, d) if contracting else spd(rng, d)) + skew
            result = check_stability(linear_field(matrix, np.zeros(d)), np.zeros(d), np.ones(d), dt=0.05,
                                     horizon=300, seed=case)
            correct += int(result.stable == contracting)
        assert correct == 50

    def test_divergence_counts_as_unstable(self):
        result = check_stability(lambda v: v * 1e200, np.zeros(2), np.ones(2), dt=0.1, epsilons=[0.1],
                                 n_directions=2, n_radii=2, horizon=5)
        assert not result.stable
        assert result.diverged_samples == 4

    def test_seeded(self):
        field = linear_field(np.array([[0.0, 1.0], [-1.0, 0.0]]))
        a = check_stability(field, np.zeros(2), np.ones(2), 0.05, [0.05], horizon=50, seed=3)
        b = check_stability(field, np.zeros(2), np.ones(2), 0.05, [0.05], horizon=50, seed=3)
        assert a == b

    def test_certified_radius(self):
        d_ini = np.array([1.0, 1.0, 2.0, 2.0, 3.0, 3.0])
        d_max = np.array([0.5, 0.5, 0.5, 2.0, 0.1, 0.1])
        assert certified_radius(d_ini, d_max, 1.0) == 1.0
        assert certified_radius(d_ini, np.full(6, 5.0), 1.0) is None

    def test_data_range(self):
        states = np.array([[0.0, 1.0], [2.0, 1.0]])
        np.testing.assert_array_equal(data_range(states), [2.0, 1.0])

    def test_mismatched_scale(self):
        with pytest.raises(DimensionError):
            check_stability(lambda v: -v, np.zeros(2), np.ones(3), 0.1)


# ============================================================================
# Newton and candidates
# ============================================================================

class TestNewton:
    """Test the damped Newton solver and candidate generation."""

    def test_quadratic_root(self):
        field = lambda v: np.asarray(v) ** 2 - np.array([1.0, 4.0])
        result = newton_solve(field, np.array([0.5, 3.0]))
        assert result.converged
        assert 0 < result.iterations < 20
        np.testing.assert_allclose(result.root, [1.0, 2.0], atol=1e-8)

    def test_singular_jacobian_uses_least_squares(self):
        field = lambda v: np.repeat((v[:, :1] + v[:, 1:] - 2.0), 2, axis=1)
        result = newton_solve(field, np.array([0.0, 0.0]))
        assert result.converged
        assert result.root.sum() == pytest.approx(2.0)

    def test_constant_field_does_not_converge(self):
        result = newton_solve(lambda v: np.ones_like(v), np.zeros(2), max_iter=5)
        assert not result.converged
        assert result.iterations == 0

    def test_grid_points(self):
        low, high = np.zeros(3), np.ones(3)
        assert grid_points(low, high, 3, cap=100, seed=0).shape == (27, 3)
        sub = grid_points(low, high, 3, cap=10, seed=0)
        assert sub.shape == (10, 3)
        np.testing.assert_array_equal(sub, grid_points(low, high, 3, cap=10, seed=0))

    def test_tail_average(self):
        traj = np.arange(20, dtype=float).reshape(10, 2)
        np.testing.assert_allclose(tail_average_candidates([traj], n_tail=2)[0], [17.0, 18.0])
        with pytest.raises(DimensionError):
            tail_average_candidates([traj], n_tail=11)


# ============================================================================
# Equilibrium search
# ============================================================================

class TestFindEquilibria:
    """Test the full search on fields with known roots."""

    def test_single_stable_node(self, decaying_trajectories, search_config):
        report = find_equilibria(linear_field(DECAY, CENTER), decaying_trajectories, search_config, dt=0.05)
        assert len(report.equilibria) == 1
        eq = report.equilibria[0]
        np.testing.assert_allclose(eq.v_eq, CENTER, atol=1e-8)
        assert eq.stable
        np.testing.assert_allclose(eq.eigenvalues, [[-2.0, 0.0], [-1.0, 0.0]], atol=1e-6)
        assert eq.frequencies == []
        assert report.n_candidates == {"data": 3}
        assert report.n_merged == 2
        assert len(report.stable()) == 1

    def test_tail_candidates(self, decaying_trajectories, search_config):
        cfg = search_config.model_copy(update={"candidate_mode": "tail"})
        report = find_equilibria(linear_field(DECAY, CENTER), decaying_trajectories, cfg, dt=0.05)
        assert report.n_candidates == {"data": 3, "tail": 6}
        assert len(report.equilibria) == 1

    def test_root_outside_data_box(self, decaying_trajectories, search_config):
        field = linear_field(np.eye(2), np.array([5.0, 5.0]))
        report = find_equilibria(field, decaying_trajectories, search_config, dt=0.05)
        assert report.equilibria == []
        assert report.n_rejected_outside == report.n_converged > 0
        assert report.note

    def test_no_root(self, decaying_trajectories, search_config):
        cfg = search_config.model_copy(update={"newton_max_iter": 5})
        report = find_equilibria(lambda v: np.ones_like(v), decaying_trajectories, cfg, dt=0.05)
        assert report.equilibria == []
        assert report.n_converged == 0

    def test_no_trajectories(self, search_config):
        with pytest.raises(DimensionError):
            find_equilibria(lambda v: -v, [], search_config, dt=0.05)
