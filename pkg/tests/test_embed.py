"""
Unit Tests for the smooth embedding: losses, schedule, training and encoding
Run with: pytest tests/test_embed.py -v
"""

import numpy as np
import pytest

from src.config import EmbedConfig, SinkhornConfig
from src.embed import (
    EmbedLoss,
    beta_schedule,
    build_embedding_model,
    decode,
    default_l0,
    encode,
    encode_dataset,
    load_embedding,
    load_encoded,
    nsv_distance,
    save_embedding,
    smoothness_loss,
    standardization,
    total_loss,
    train_embedding,
    write_encoded,
)
from src.utils.errors import DimensionError, TrainingDivergedError


@pytest.fixture
def embed_config():
    """Short training run."""
    return EmbedConfig(intrinsic_dim=2, steps=6, batch_size=8, eval_every=3, beta_cycle=4)


@pytest.fixture
def model(rng):
    """Untrained 8 -> 2 -> 8 autoencoder."""
    obs = rng.normal(size=(40, 8))
    mean, std = standardization(obs)
    return build_embedding_model(2, mean, std, seed=1, omega0=2.0)


# ============================================================================
# Smoothness and schedule
# ============================================================================

class TestSmoothness:
    """Test the hinge smoothness loss and distances."""

    def test_hinge_values(self):
        v0 = np.array([[0.0, 0.0]])
        v1 = np.array([[0.3, 0.0]])
        v2 = np.array([[0.5, 0.0]])
        assert smoothness_loss(v0, v1, v2, l0=0.1, eta=1) == pytest.approx(0.5)
        assert smoothness_loss(v0, v1, v2, l0=0.1, eta=0) == pytest.approx(0.3)

    def test_below_threshold_is_free(self):
        v0 = np.zeros((2, 2))
        v1 = np.full((2, 2), 0.01)
        v2 = np.full((2, 2), 0.02)
        assert smoothness_loss(v0, v1, v2, l0=0.1, eta=1) == 0.0

    def test_torus_wraps(self):
        assert nsv_distance(np.array([0.9]), np.array([-0.9]), "torus") == pytest.approx(0.2)
        assert nsv_distance(np.array([0.9]), np.array([-0.9]), "box") == pytest.approx(1.8)

    def test_shape_mismatch(self):
        with pytest.raises(DimensionError):
            nsv_distance(np.zeros(2), np.zeros(3))

    def test_default_threshold(self):
        assert default_l0(2, 60) == pytest.approx(2 * np.sqrt(2) / 60)


class TestBetaSchedule:
    """Test the cyclic annealing weight."""

    def test_cycle_shape(self):
        cfg = EmbedConfig(beta_cycle=8, beta_zero_fraction=0.25, beta_ramp_fraction=0.25, beta_hold_fraction=0.25)
        values = [beta_schedule(step, cfg) for step in range(10)]
        assert values == [0.0, 0.0, 0.0, 0.5, 1.0, 1.0, 0.0, 0.0, 0.0, 0.0]

    def test_disabled(self):
        cfg = EmbedConfig(anneal=False)
        assert all(beta_schedule(step, cfg) == 0.0 for step in range(5000))

    def test_fractions_must_fit(self):
        with pytest.raises(ValueError):
            EmbedConfig(beta_zero_fraction=0.5, beta_ramp_fraction=0.5, beta_hold_fraction=0.5)


# ============================================================================
# Composite loss
# ============================================================================

class TestTotalLoss:
    """Test the composite loss and its gradients."""

    def test_gradients_match_finite_differences(self, model, rng):
        batch = rng.normal(size=(5, 3, 8))
        cfg = EmbedConfig(w_space=0.1, l0=0.01, sinkhorn=SinkhornConfig(blur=0.5, max_iter=5000, tolerance=1e-12))
        reference = rng.uniform(-1, 1, size=(5, 2))
        loss = total_loss(batch, model, 1.0, cfg, reference=reference)

        def value(enc_arrays, dec_arrays):
            perturbed = model.with_params(model.encoder.with_arrays(enc_arrays), model.decoder.with_arrays(dec_arrays))
            return total_loss(batch, perturbed, 1.0, cfg, reference=reference).value

        enc, dec = model.encoder.arrays(), model.decoder.arrays()
        h = 1e-6
        for which, k in [("enc", 0), ("enc", 7), ("dec", 0), ("dec", 7)]:
            arrays = enc if which == "enc" else dec
            idx = (0,) * arrays[k].ndim
            plus = [a.copy() for a in arrays]
            minus = [a.copy() for a in arrays]
            plus[k][idx] += h
            minus[k][idx] -= h
            if which == "enc":
                numeric = (value(plus, dec) - value(minus, dec)) / (2 * h)
                analytic = loss.encoder_grads[k][idx]
            else:
                numeric = (value(enc, plus) - value(enc, minus)) / (2 * h)
                analytic = loss.decoder_grads[k][idx]
            assert analytic == pytest.approx(numeric, rel=1e-4, abs=1e-7)

    def test_zero_beta_is_reconstruction_only(self, model, rng):
        batch = rng.normal(size=(4, 3, 8))
        loss = total_loss(batch, model, 0.0, EmbedConfig(l0=0.01))
        assert loss.value == pytest.approx(loss.reconstruct)
        assert loss.space is None

    def test_batch_must_be_triplets(self, model):
        with pytest.raises(DimensionError):
            total_loss(np.zeros((4, 2, 8)), model, 0.0, EmbedConfig(l0=0.01))


# ============================================================================
# Training and encoding
# ============================================================================

class TestTraining:
    """Test the embedding trainer and persistence."""

    def test_short_run(self, spring_dataset, embed_config):
        model, report = train_embedding(spring_dataset, embed_config, 2, seed=4)
        assert report.steps_run == 6
        assert len(report.records) == 6
        assert [v["step"] for v in report.validation] == [3.0, 6.0]
        assert report.best_step in (3, 6)
        assert np.isfinite(report.best_validation)
        assert model.latent_dim == 2

    def test_training_is_reproducible(self, spring_dataset, embed_config):
        a, _ = train_embedding(spring_dataset, embed_config, 2, seed=4)
        b, _ = train_embedding(spring_dataset, embed_config, 2, seed=4)
        obs = spring_dataset.observations("test")
        np.testing.assert_array_equal(encode(a, obs), encode(b, obs))

    def test_divergence_keeps_last_good(self, spring_dataset, embed_config, mocker):
        bad = EmbedLoss(value=float("nan"), reconstruct=float("nan"), smooth=0.0, space=None,
                        encoder_grads=[], decoder_grads=[])
        mocker.patch("src.embed.trainer.total_loss", return_value=bad)
        with pytest.raises(TrainingDivergedError) as exc:
            train_embedding(spring_dataset, embed_config, 2, seed=4)
        assert exc.value.step == 0
        assert exc.value.last_good is not None

    def test_encoded_states_lie_in_box(self, spring_dataset, model):
        encoded = encode_dataset(model, spring_dataset)
        assert sorted(encoded) == ["test", "train", "val"]
        states = np.concatenate([t.states for t in encoded["train"]])
        assert states.shape == (40, 2)
        assert np.all(np.abs(states) <= 1.0)

    def test_decode_shape(self, model):
        assert decode(model, np.zeros((3, 2))).shape == (3, 8)
        with pytest.raises(DimensionError):
            decode(model, np.zeros(3))

    def test_save_and_load(self, model, tmp_path, rng):
        path = save_embedding(model, tmp_path / "embed.json", seed=1)
        loaded = load_embedding(path)
        obs = rng.normal(size=(5, 8))
        np.testing.assert_array_equal(encode(loaded, obs), encode(model, obs))

    def test_write_and_load_encoded(self, spring_dataset, model, tmp_path):
        encoded = encode_dataset(model, spring_dataset)
        write_encoded(encoded, tmp_path / "encoded")
        loaded = load_encoded(tmp_path / "encoded")
        assert len(loaded["val"]) == 2
        np.testing.assert_array_equal(loaded["val"][1].states, encoded["val"][1].states)
        assert loaded["val"][1].dt == pytest.approx(0.02)
