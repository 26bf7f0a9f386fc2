"""
Unit Tests for the dense network kernel, Adam and checkpoints
Run with: pytest tests/test_nn.py -v
"""

import numpy as np
import pytest

from src.nn import (
    LayerSpec,
    TrainingReport,
    adam_step,
    backward,
    forward,
    init_adam,
    init_mlp,
    jacobian_of_net,
    load_checkpoint,
    predict,
    save_checkpoint,
    zero_mlp,
)
from src.utils.errors import ConfigurationError, DimensionError, ProvenanceError, StaleCacheError


@pytest.fixture
def small_net():
    """3 -> 5 (sine) -> 4 (relu) -> 2 network."""
    specs = [LayerSpec(3, 5, "sine"), LayerSpec(5, 4, "relu"), LayerSpec(4, 2, "none")]
    return init_mlp(specs, seed=9, omega0=2.0)


# ============================================================================
# Forward and backward
# ============================================================================

class TestMlp:
    """Test the forward pass and exact gradients."""

    def test_single_and_batched_agree(self, small_net, rng):
        x = rng.normal(size=(4, 3))
        batched = predict(small_net, x)
        assert batched.shape == (4, 2)
        np.testing.assert_allclose(predict(small_net, x[1]), batched[1])

    def test_parameter_gradients_match_finite_differences(self, small_net, rng):
        x = rng.normal(size=(6, 3))
        g_out = rng.normal(size=(6, 2))
        _, cache = forward(small_net, x)
        grads, _ = backward(small_net, cache, g_out)

        arrays = small_net.arrays()
        h = 1e-6
        for k in (0, 1, 4):
            idx = (0,) * arrays[k].ndim
            plus = [a.copy() for a in arrays]
            minus = [a.copy() for a in arrays]
            plus[k][idx] += h
            minus[k][idx] -= h
            f_plus = np.sum(g_out * predict(small_net.with_arrays(plus), x))
            f_minus = np.sum(g_out * predict(small_net.with_arrays(minus), x))
            assert grads[k][idx] == pytest.approx((f_plus - f_minus) / (2 * h), rel=1e-5, abs=1e-8)

    def test_jacobian_matches_finite_differences(self, small_net):
        x = np.array([0.3, -0.2, 0.1])
        jac = jacobian_of_net(small_net, x)
        h = 1e-6
        numeric = np.stack(
            [(predict(small_net, x + h * e) - predict(small_net, x - h * e)) / (2 * h) for e in np.eye(3)], axis=1
        )
        np.testing.assert_allclose(jac, numeric, rtol=1e-5, atol=1e-8)

    def test_stale_cache(self, small_net):
        _, cache = forward(small_net, np.zeros(3))
        other = small_net.with_arrays(small_net.arrays())
        with pytest.raises(StaleCacheError):
            backward(other, cache, np.zeros(2))

    def test_wrong_input_width(self, small_net):
        with pytest.raises(DimensionError):
            forward(small_net, np.zeros((2, 4)))

    def test_broken_chain(self):
        with pytest.raises(DimensionError):
            zero_mlp([LayerSpec(2, 3), LayerSpec(4, 1)])

    def test_sine_initialization_keeps_unit_scale(self, rng):
        specs = [LayerSpec(2, 64, "sine"), LayerSpec(64, 64, "sine"), LayerSpec(64, 64, "sine")]
        params = init_mlp(specs, seed=0, omega0=30.0)
        radius = np.sqrt(rng.uniform(0, 1, 2000))
        angle = rng.uniform(0, 2 * np.pi, 2000)
        x = np.stack([radius * np.cos(angle), radius * np.sin(angle)], axis=1)
        variance = predict(params, x).var(axis=0).mean()
        assert 0.1 < variance < 1.0

    def test_initialization_is_seeded(self):
        specs = [LayerSpec(2, 8, "sine"), LayerSpec(8, 1)]
        a, b = init_mlp(specs, 4), init_mlp(specs, 4)
        for x, y in zip(a.arrays(), b.arrays()):
            np.testing.assert_array_equal(x, y)


# ============================================================================
# Adam
# ============================================================================

class TestAdam:
    """Test the Adam update."""

    def test_first_step_moves_by_learning_rate(self):
        params = [np.array([1.0, -2.0])]
        state = init_adam(params, lr=0.1)
        new, state = adam_step(params, [np.array([3.0, -0.5])], state)
        np.testing.assert_allclose(new[0], [0.9, -1.9], atol=1e-7)
        assert state.step == 1
        np.testing.assert_array_equal(params[0], [1.0, -2.0])

    def test_minimizes_quadratic(self):
        params = [np.array([5.0, -3.0])]
        state = init_adam(params, lr=0.1)
        for _ in range(500):
            params, state = adam_step(params, [2.0 * params[0]], state)
        assert np.linalg.norm(params[0]) < 0.5

    def test_shape_mismatch(self):
        params = [np.zeros(2)]
        with pytest.raises(DimensionError):
            adam_step(params, [np.zeros(3)], init_adam(params))


# ============================================================================
# Checkpoints and reports
# ============================================================================

class TestCheckpoint:
    """Test checkpoint persistence."""

    def test_save_and_load(self, small_net, tmp_path):
        path = save_checkpoint(tmp_path / "ckpt.json", {"net": small_net}, seed=9, metadata={"label": "smooth"})
        networks, rest = load_checkpoint(path)
        x = np.array([0.1, 0.2, 0.3])
        np.testing.assert_array_equal(predict(networks["net"], x), predict(small_net, x))
        assert rest["metadata"] == {"label": "smooth"}
        assert rest["seed"] == 9

    def test_fingerprint_mismatch(self, small_net, tmp_path):
        path = save_checkpoint(tmp_path / "ckpt.json", {"net": small_net}, seed=0)
        text = path.read_text().replace('"relu"', '"sine"')
        path.write_text(text)
        with pytest.raises(ProvenanceError):
            load_checkpoint(path)

    def test_format_version(self, small_net, tmp_path):
        path = save_checkpoint(tmp_path / "ckpt.json", {"net": small_net}, seed=0)
        path.write_text(path.read_text().replace('"format_version": 1', '"format_version": 99'))
        with pytest.raises(ConfigurationError):
            load_checkpoint(path)

    def test_report_curve(self):
        report = TrainingReport(kind="field", seed=1, records=[{"step": 0, "loss": 1.0}, {"step": 1, "loss": 0.5}])
        assert list(report.curve()["loss"]) == [1.0, 0.5]
