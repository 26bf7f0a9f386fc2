"""
Unit Tests for the ground-truth systems and the RK4 integrator
Run with: pytest tests/test_systems.py -v
"""

import math

import numpy as np
import pytest

from src.systems import (
    DoublePendulumParams,
    HopfParams,
    PendulumParams,
    SpringMassParams,
    double_pendulum_energy,
    get_system,
    hopf_deriv,
    integrate_batch_masked,
    integrate_fixed_step,
    linear_frequencies,
    make_deriv,
    resolve_params,
    sample_initial_state,
    simulate,
)
from src.utils.errors import (
    ConfigurationError,
    DimensionError,
    IntegrationDivergenceError,
)


# ============================================================================
# Derivatives and frequencies
# ============================================================================

class TestDynamics:
    """Test the derivative functions."""

    def test_spring_mass_matches_closed_form(self):
        traj = simulate("spring_mass", SpringMassParams(), [0.1, 0.0], dt=0.01, n_steps=101, substeps=10)
        t = traj.times
        expected = 0.1 * np.cos(math.sqrt(80.0) * t)
        assert len(traj) == 101
        assert np.max(np.abs(traj.states[:, 0] - expected)) < 1e-6

    def test_batched_derivative_shape(self):
        spec = get_system("double_pendulum")
        states = np.zeros((3, 5, 4))
        assert spec.deriv(states, DoublePendulumParams()).shape == (3, 5, 4)

    def test_wrong_state_width(self):
        spec = get_system("single_pendulum")
        with pytest.raises(DimensionError):
            spec.deriv(np.zeros(3), PendulumParams())

    def test_hopf_cycle_is_invariant(self):
        p = HopfParams()
        r = math.sqrt(p.mu / p.stiffness)
        state = np.array([r, 0.0, 0.0])
        deriv = hopf_deriv(state, p)
        assert deriv[0] == pytest.approx(0.0, abs=1e-12)
        assert deriv[1] == pytest.approx(p.omega * r)

    def test_hopf_decays_below_the_bifurcation(self):
        deriv = make_deriv("hopf", HopfParams(mu=-0.5))
        out = integrate_fixed_step(deriv, np.array([0.8, -0.3, 0.5]), dt=0.05, n_steps=300, substeps=4)
        norms = np.linalg.norm(out, axis=1)
        assert np.all(np.diff(norms) < 0)
        assert norms[-1] < 1e-3

    def test_spring_returns_after_one_period(self):
        deriv = make_deriv("spring_mass", SpringMassParams())
        period = 2 * math.pi / math.sqrt(80.0)
        start = np.array([0.3, -1.2])
        out = integrate_fixed_step(deriv, start, dt=period / 200, n_steps=201, substeps=10)
        np.testing.assert_allclose(out[-1], start, atol=1e-6)

    def test_spring_time_reversal(self):
        deriv = make_deriv("spring_mass", SpringMassParams())
        start = np.array([0.25, 0.7])
        flip = np.array([1.0, -1.0])
        forward = integrate_fixed_step(deriv, start, dt=0.01, n_steps=101, substeps=10)[-1]
        back = integrate_fixed_step(deriv, forward * flip, dt=0.01, n_steps=101, substeps=10)[-1] * flip
        np.testing.assert_allclose(back, start, atol=1e-8)

    def test_reference_frequencies(self):
        assert linear_frequencies("spring_mass", SpringMassParams())[0] == pytest.approx(8.944, abs=1e-3)
        assert linear_frequencies("single_pendulum", PendulumParams())[0] == pytest.approx(5.425, abs=1e-3)

    def test_double_pendulum_has_two_modes(self):
        freqs = linear_frequencies("double_pendulum", DoublePendulumParams())
        assert len(freqs) == 2
        assert freqs[0] > freqs[1] > 0

    @pytest.mark.slow
    def test_double_pendulum_conserves_energy(self):
        p = DoublePendulumParams()
        traj = simulate("double_pendulum", p, [1.2, -0.8, 0.5, -0.5], dt=0.01, n_steps=1001, substeps=10)
        energy = double_pendulum_energy(traj.states, p)
        assert np.max(np.abs(energy - energy[0])) / abs(energy[0]) < 1e-5


# ============================================================================
# Parameters and sampling
# ============================================================================

class TestParameters:
    """Test parameter resolution and initial-state sampling."""

    def test_unknown_system(self):
        with pytest.raises(ConfigurationError):
            get_system("triple_pendulum")

    def test_override_is_validated(self):
        with pytest.raises(ConfigurationError) as exc:
            resolve_params("spring_mass", {"mass": -1.0})
        assert exc.value.field == "system.params.mass"

    def test_unknown_parameter(self):
        with pytest.raises(ConfigurationError):
            resolve_params("spring_mass", {"damping": 0.1})

    def test_overrides_apply(self):
        params = resolve_params("spring_mass", {"spring_constant": 20.0})
        assert params.spring_constant == 20.0
        assert params.mass == 1.0

    def test_sampling_is_deterministic_and_in_box(self):
        a = sample_initial_state("single_pendulum", None, 7)
        b = sample_initial_state("single_pendulum", None, 7)
        np.testing.assert_array_equal(a, b)
        assert np.all(a >= [-0.5, -1.0]) and np.all(a <= [0.5, 1.0])

    def test_empty_box(self):
        with pytest.raises(ConfigurationError):
            sample_initial_state("spring_mass", None, 0, low=[0.2, 0.0], high=[0.1, 1.0])

    def test_box_length(self):
        with pytest.raises(DimensionError):
            sample_initial_state("spring_mass", None, 0, low=[0.0], high=[1.0])

    def test_params_of_another_system(self):
        with pytest.raises(ConfigurationError):
            sample_initial_state("spring_mass", PendulumParams(), 0)

    def test_zero_width_box(self):
        params = resolve_params("spring_mass")
        state = sample_initial_state("spring_mass", params, 3, low=[0.0, 0.0], high=[0.0, 0.0])
        np.testing.assert_array_equal(state, [0.0, 0.0])


# ============================================================================
# Integrator
# ============================================================================

class TestIntegrator:
    """Test fixed-step RK4."""

    def test_exponential_decay(self):
        out = integrate_fixed_step(lambda y: -y, np.array([1.0]), dt=0.1, n_steps=11, substeps=4)
        assert out.shape == (11, 1)
        assert out[-1, 0] == pytest.approx(math.exp(-1.0), rel=1e-8)

    def test_fourth_order_convergence(self):
        exact = math.exp(-1.0)
        coarse = integrate_fixed_step(lambda y: -y, np.array([1.0]), dt=0.1, n_steps=11)[-1, 0]
        fine = integrate_fixed_step(lambda y: -y, np.array([1.0]), dt=0.1, n_steps=11, substeps=2)[-1, 0]
        ratio = abs(coarse - exact) / abs(fine - exact)
        assert 12.0 <= ratio <= 20.0

    def test_batched_output_layout(self):
        y0 = np.array([[1.0, 0.0], [0.0, 2.0], [3.0, 3.0]])
        out = integrate_fixed_step(lambda y: -y, y0, dt=0.1, n_steps=5)
        assert out.shape == (3, 5, 2)
        np.testing.assert_array_equal(out[:, 0], y0)

    def test_divergence_reports_step(self):
        with pytest.raises(IntegrationDivergenceError) as exc:
            integrate_fixed_step(lambda y: y * 1e200, np.array([1.0]), dt=0.1, n_steps=5)
        assert exc.value.step_index == 1

    def test_masked_batch_freezes_diverged_rows(self):
        y0 = np.array([[1.0], [0.0]])
        out, diverged = integrate_batch_masked(lambda y: y * 1e200, y0, dt=0.1, n_steps=4)
        assert diverged.tolist() == [True, False]
        assert np.all(np.isnan(out[0, 1:]))
        np.testing.assert_array_equal(out[1], np.zeros((4, 1)))

    @pytest.mark.parametrize("dt,n_steps,substeps", [(0.0, 3, 1), (0.1, 0, 1), (0.1, 3, 0)])
    def test_invalid_grid(self, dt, n_steps, substeps):
        with pytest.raises(ConfigurationError):
            integrate_fixed_step(lambda y: y, np.zeros(1), dt, n_steps, substeps)

    def test_simulate_needs_two_samples(self):
        with pytest.raises(ConfigurationError):
            simulate("spring_mass", SpringMassParams(), [0.1, 0.0], dt=0.01, n_steps=1)
