"""
Unit Tests for the Sinkhorn divergence and the dimension estimator
Run with: pytest tests/test_transport.py -v
"""

import itertools

import numpy as np
import pytest

from src.config import SinkhornConfig
from src.dimension import levina_bickel, nearest_neighbors, round_estimate
from src.transport import entropic_transport, sinkhorn_divergence, uniform_reference
from src.utils.errors import ConfigurationError, DegenerateInputError, DimensionError


@pytest.fixture
def tight():
    """Solver settings that converge to machine precision on small clouds."""
    return SinkhornConfig(blur=0.5, max_iter=5000, tolerance=1e-12)


# ============================================================================
# Sinkhorn
# ============================================================================

class TestSinkhorn:
    """Test the entropic transport value and gradient."""

    def test_identical_clouds_have_zero_divergence(self, rng, tight):
        x = rng.uniform(-1, 1, size=(12, 2))
        result = sinkhorn_divergence(x, x.copy(), tight)
        assert abs(result.value) < 1e-12
        assert np.max(np.abs(result.gradient)) < 1e-9

    def test_divergence_is_positive_for_shifted_clouds(self, rng, tight):
        x = rng.uniform(-1, 1, size=(10, 2))
        result = sinkhorn_divergence(x, x + 0.5, tight)
        assert result.converged
        assert result.value > 0

    def test_gradient_matches_finite_differences(self, rng, tight):
        x = rng.uniform(-1, 1, size=(6, 2))
        y = rng.uniform(-1, 1, size=(8, 2))
        grad = sinkhorn_divergence(x, y, tight).gradient
        h = 1e-6
        for i, j in [(0, 0), (3, 1), (5, 0)]:
            plus, minus = x.copy(), x.copy()
            plus[i, j] += h
            minus[i, j] -= h
            numeric = (sinkhorn_divergence(plus, y, tight).value - sinkhorn_divergence(minus, y, tight).value) / (2 * h)
            assert grad[i, j] == pytest.approx(numeric, rel=1e-4, abs=1e-7)

    def test_small_blur_approaches_assignment(self):
        x = np.array([[0.0, 0.0], [1.0, 0.0], [0.0, 2.0]])
        y = np.array([[0.1, 2.1], [0.9, -0.2], [-0.1, 0.1]])
        cfg = SinkhornConfig(blur=1e-3, max_iter=20000, tolerance=1e-12, debiased=False)
        best = min(
            np.mean(np.sum((x - y[list(perm)]) ** 2, axis=1)) for perm in itertools.permutations(range(3))
        )
        result = entropic_transport(x, y, cfg)
        assert result.value == pytest.approx(best, abs=5e-3)
        np.testing.assert_allclose(result.plan.sum(axis=1), np.full(3, 1 / 3), atol=1e-9)

    def test_symmetric(self, rng, tight):
        x = rng.uniform(-1, 1, size=(7, 3))
        y = rng.uniform(-1, 1, size=(9, 3))
        forward = sinkhorn_divergence(x, y, tight).value
        backward = sinkhorn_divergence(y, x, tight).value
        assert forward == pytest.approx(backward, rel=1e-8, abs=1e-12)

    def test_single_points_cost_the_squared_distance(self, tight):
        x = np.array([[0.2, -0.4]])
        y = np.array([[-0.1, 0.6]])
        expected = 0.3 ** 2 + 1.0 ** 2
        assert entropic_transport(x, y, tight).value == pytest.approx(expected, rel=1e-12)
        assert sinkhorn_divergence(x, y, tight).value == pytest.approx(expected, rel=1e-12)

    def test_dimension_mismatch(self):
        with pytest.raises(DimensionError):
            sinkhorn_divergence(np.zeros((3, 2)), np.zeros((3, 3)))

    def test_empty_cloud(self):
        with pytest.raises(DimensionError):
            sinkhorn_divergence(np.zeros((0, 2)), np.zeros((3, 2)))

    def test_uniform_reference(self):
        ref = uniform_reference(3, 500, seed=1)
        assert ref.shape == (500, 3)
        assert np.all(np.abs(ref) <= 1.0)
        np.testing.assert_array_equal(ref, uniform_reference(3, 500, seed=1))


# ============================================================================
# Intrinsic dimension
# ============================================================================

class TestDimension:
    """Test nearest neighbors and the Levina-Bickel estimate."""

    def test_nearest_neighbors_on_a_line(self):
        points = np.array([[0.0], [1.0], [3.0], [7.0]])
        distances, indices, _ = nearest_neighbors(points, 2)
        assert indices[0].tolist() == [1, 2]
        np.testing.assert_array_equal(distances[3], [4.0, 6.0])

    def test_plane_in_ten_dimensions(self, rng):
        basis, _ = np.linalg.qr(rng.normal(size=(10, 2)))
        points = rng.uniform(-1, 1, size=(2000, 2)) @ basis.T
        estimate = levina_bickel(points, k_min=10, k_max=20)
        assert estimate.rounded == 2
        assert abs(estimate.raw - 2.0) < 0.3
        assert len(estimate.per_k) == 11

    @pytest.mark.slow
    @pytest.mark.parametrize("d", [3, 4])
    def test_cubes(self, rng, d):
        points = rng.uniform(-1, 1, size=(4000, d))
        assert levina_bickel(points, k_min=10, k_max=20).rounded == d

    @pytest.mark.parametrize("raw, expected", [(2.5, 3), (1.5, 2), (2.49, 2), (3.51, 4), (0.5, 1)])
    def test_halves_round_up(self, raw, expected):
        assert round_estimate(raw) == expected

    def test_duplicates_are_excluded(self, rng):
        base = rng.uniform(-1, 1, size=(300, 2))
        points = np.concatenate([base, base[:20]])
        estimate = levina_bickel(points, k_min=5, k_max=8)
        assert estimate.excluded_pairs == 40
        assert np.isfinite(estimate.raw)

    def test_coincident_points(self):
        with pytest.raises(DegenerateInputError):
            levina_bickel(np.zeros((50, 3)), k_min=3, k_max=5)

    def test_too_few_points(self, rng):
        with pytest.raises(DegenerateInputError):
            levina_bickel(rng.normal(size=(10, 2)), k_min=5, k_max=10)

    def test_invalid_k_range(self, rng):
        with pytest.raises(ConfigurationError):
            levina_bickel(rng.normal(size=(100, 2)), k_min=2, k_max=5)
