"""
Unit Tests for pipeline commands, manifests and the run event log
Run with: pytest tests/test_pipeline.py -v
"""

import json

import pytest

from src.exporters import JSONExporter
from src.field import FieldAccuracy
from src.pipeline import (
    BASELINE,
    SMOOTH,
    RunLayout,
    RunLog,
    check_label,
    horizon_no_worse,
    cmd_estimate_dim,
    cmd_pipeline,
    cmd_simulate,
    cmd_train_embed,
    cmd_train_field,
    embed_config_for,
    load_manifest,
    manifest_path,
    resolve_latent_dim,
    verify_stage,
    write_manifest,
)
from src.pipeline.provenance import utc_now
from src.utils.errors import ConfigurationError, MissingArtifactError, ProvenanceError


def read_events(run_dir):
    path = run_dir / "logs" / "events.jsonl"
    return [json.loads(line) for line in path.read_text(encoding="utf-8").splitlines() if line.strip()]


@pytest.fixture
def simulated(tiny_config, tmp_path):
    """Run directory after the simulate stage."""
    cmd_simulate(tiny_config, tmp_path)
    return tmp_path


# ============================================================================
# Layout and manifests
# ============================================================================

class TestLayout:
    """Test run labels and directory layout."""

    @pytest.mark.parametrize("label", ["smooth", "baseline", "run-2", "a_b"])
    def test_valid_labels(self, label):
        assert check_label(label) == label

    @pytest.mark.parametrize("label", ["Bad Label", "", "-x", "../up"])
    def test_invalid_labels(self, label):
        with pytest.raises(ConfigurationError):
            check_label(label)

    def test_paths(self, tmp_path):
        layout = RunLayout.at(tmp_path)
        assert layout.encoded(SMOOTH) == tmp_path / "embed" / "smooth" / "encoded"
        assert layout.dimension_estimate == tmp_path / "dimension" / "estimate.json"
        assert manifest_path(tmp_path, "field/smooth") == tmp_path / "manifests" / "field__smooth.json"


class TestManifest:
    """Test content hashes and verification."""

    def test_verify_unchanged(self, tmp_path):
        artifact = tmp_path / "out" / "a.txt"
        artifact.parent.mkdir()
        artifact.write_text("alpha")
        written = write_manifest(tmp_path, "demo", "demo", 1, [], [artifact.parent], utc_now(), label="x")
        assert list(written.outputs) == ["out/a.txt"]
        assert verify_stage(tmp_path, "demo").outputs == written.outputs

    def test_modified_artifact(self, tmp_path):
        artifact = tmp_path / "a.txt"
        artifact.write_text("alpha")
        write_manifest(tmp_path, "demo", "demo", 1, [], [artifact], utc_now())
        artifact.write_text("beta")
        with pytest.raises(ProvenanceError) as exc:
            verify_stage(tmp_path, "demo")
        assert list(exc.value.diff) == ["a.txt"]
        assert exc.value.exit_code == 4

    def test_deleted_artifact(self, tmp_path):
        artifact = tmp_path / "a.txt"
        artifact.write_text("alpha")
        write_manifest(tmp_path, "demo", "demo", 1, [], [artifact], utc_now())
        artifact.unlink()
        with pytest.raises(ProvenanceError) as exc:
            verify_stage(tmp_path, "demo")
        assert exc.value.diff["a.txt"][1] == "missing"

    def test_upstream_artifact_changed(self, tmp_path):
        artifact = tmp_path / "a.txt"
        artifact.write_text("alpha")
        write_manifest(tmp_path, "up", "up", 1, [], [artifact], utc_now())
        write_manifest(tmp_path, "down", "down", 1, [manifest_path(tmp_path, "up")], [], utc_now())
        artifact.write_text("beta")
        with pytest.raises(ProvenanceError) as exc:
            verify_stage(tmp_path, "down")
        assert list(exc.value.diff) == ["a.txt"]

    def test_upstream_rerun(self, tmp_path):
        artifact = tmp_path / "a.txt"
        artifact.write_text("alpha")
        write_manifest(tmp_path, "up", "up", 1, [], [artifact], utc_now())
        write_manifest(tmp_path, "down", "down", 1, [manifest_path(tmp_path, "up")], [], utc_now())
        write_manifest(tmp_path, "up", "up", 2, [], [artifact], utc_now())
        verify_stage(tmp_path, "up")
        with pytest.raises(ProvenanceError) as exc:
            verify_stage(tmp_path, "down")
        assert list(exc.value.diff) == ["manifests/up.json"]

    def test_stage_not_run(self, tmp_path):
        with pytest.raises(MissingArtifactError):
            load_manifest(tmp_path, "simulate")


class TestRunLog:
    """Test the JSON-lines event log."""

    def test_events_are_appended(self, tmp_path):
        log = RunLog(tmp_path, "simulate")
        log.dataset_written(tmp_path / "dataset", 10)
        log.command_finished(False, {"error": "X"})
        log.close()
        events = log.read_events()
        assert [e["event_type"] for e in events] == ["dataset_written", "command_finished"]
        assert events[0]["details"]["sequences"] == 10
        assert events[1]["success"] is False
        assert all(e["command"] == "simulate" for e in events)


# ============================================================================
# Commands
# ============================================================================

class TestCommands:
    """Test stage commands on a tiny spring-mass run."""

    def test_simulate_writes_dataset_and_manifest(self, tiny_config, tmp_path):
        result = cmd_simulate(tiny_config, tmp_path, command_line=["nsv_cli.py", "simulate"])
        assert result["sequences"] == 10
        manifest = load_manifest(tmp_path, "simulate")
        assert manifest.seed == 3
        assert manifest.command_line == ["nsv_cli.py", "simulate"]
        assert "dataset/manifest.json" in manifest.outputs
        assert [e["event_type"] for e in read_events(tmp_path)] == ["dataset_written", "command_finished"]

    def test_simulate_is_deterministic(self, tiny_config, tmp_path):
        cmd_simulate(tiny_config, tmp_path / "a")
        cmd_simulate(tiny_config, tmp_path / "b")
        assert load_manifest(tmp_path / "a", "simulate").outputs == load_manifest(tmp_path / "b", "simulate").outputs

    def test_dry_run_writes_nothing(self, tiny_config, tmp_path):
        result = cmd_simulate(tiny_config, tmp_path / "dry", dry_run=True)
        assert result["dry_run"] is True
        assert not (tmp_path / "dry").exists()

    def test_missing_upstream(self, tiny_config, tmp_path):
        with pytest.raises(MissingArtifactError):
            cmd_estimate_dim(tiny_config, tmp_path)

    def test_tampered_upstream(self, tiny_config, simulated):
        with open(simulated / "dataset" / "manifest.json", "a", encoding="utf-8") as f:
            f.write(" ")
        with pytest.raises(ProvenanceError):
            cmd_estimate_dim(tiny_config, simulated)
        events = read_events(simulated)
        assert events[-2]["event_type"] == "provenance_mismatch"
        assert events[-1]["event_type"] == "command_finished"
        assert events[-1]["success"] is False

    def test_estimate_dim(self, tiny_config, simulated):
        result = cmd_estimate_dim(tiny_config, simulated)
        assert result["rounded"] >= 1
        document = JSONExporter.load(RunLayout.at(simulated).dimension_estimate)
        assert document["reference_dim"] == 2
        assert (simulated / "dimension" / "per_k.csv").exists()

    def test_train_embed_dry_run(self, tiny_config, simulated):
        result = cmd_train_embed(tiny_config, simulated, SMOOTH, dry_run=True)
        assert result["latent_dim"] == 2
        assert not (simulated / "embed").exists()

    def test_train_embed(self, tiny_config, simulated):
        result = cmd_train_embed(tiny_config, simulated, SMOOTH)
        assert result["latent_dim"] == 2
        layout = RunLayout.at(simulated)
        assert (layout.embed(SMOOTH) / "checkpoint.json").exists()
        assert layout.encoded(SMOOTH).is_dir()
        assert (layout.embed(SMOOTH) / "validation.csv").exists()
        assert load_manifest(simulated, "embed/smooth").label == SMOOTH

    def test_resimulating_invalidates_trained_stages(self, tiny_config, simulated):
        cmd_train_embed(tiny_config, simulated, SMOOTH)
        cmd_simulate(tiny_config.model_copy(update={"seed": tiny_config.seed + 1}), simulated)
        with pytest.raises(ProvenanceError) as exc:
            cmd_train_field(tiny_config, simulated, SMOOTH)
        assert "manifests/simulate.json" in exc.value.diff
        assert read_events(simulated)[-2]["event_type"] == "provenance_mismatch"

    def test_invalid_label(self, tiny_config, simulated):
        with pytest.raises(ConfigurationError):
            cmd_train_embed(tiny_config, simulated, "Bad Label")


class TestLatentDim:
    """Test the choice of latent dimension and baseline settings."""

    def test_configured_dim_wins(self, tiny_config, tmp_path):
        assert resolve_latent_dim(tiny_config, RunLayout.at(tmp_path)) == 2

    def test_needs_an_estimate(self, tiny_config, tmp_path):
        cfg = tiny_config.model_copy(update={"embed": tiny_config.embed.model_copy(update={"intrinsic_dim": None})})
        with pytest.raises(MissingArtifactError):
            resolve_latent_dim(cfg, RunLayout.at(tmp_path))

    def test_estimate_out_of_range(self, tiny_config, tmp_path):
        cfg = tiny_config.model_copy(update={"embed": tiny_config.embed.model_copy(update={"intrinsic_dim": None})})
        layout = RunLayout.at(tmp_path)
        JSONExporter.export({"estimate": {"rounded": 7}}, layout.dimension_estimate)
        with pytest.raises(ConfigurationError):
            resolve_latent_dim(cfg, layout)

    def test_baseline_turns_regularizers_off(self, tiny_config):
        baseline = embed_config_for(tiny_config, BASELINE)
        assert baseline.w_smooth == 0.0
        assert baseline.w_space == 0.0
        assert embed_config_for(tiny_config, SMOOTH) == tiny_config.embed


class TestAblationComparison:
    """Test how full-horizon accuracy of two fields is compared."""

    @staticmethod
    def accuracy(error, diverged):
        return FieldAccuracy(n_trajectories=12, single_step_error=0.1, full_horizon_error=error, diverged=diverged)

    def test_lower_error_wins(self):
        assert horizon_no_worse(self.accuracy(0.2, 0), self.accuracy(0.3, 0))
        assert not horizon_no_worse(self.accuracy(0.4, 0), self.accuracy(0.3, 0))

    def test_divergence_counts_first(self):
        assert horizon_no_worse(self.accuracy(0.2, 0), self.accuracy(0.01, 11))
        assert not horizon_no_worse(self.accuracy(0.01, 11), self.accuracy(0.2, 0))

    def test_all_diverged_never_passes(self):
        assert not horizon_no_worse(self.accuracy(None, 12), self.accuracy(None, 12))


# ============================================================================
# End to end
# ============================================================================

class TestPipeline:
    """Test the full command chain on the tiny configuration."""

    @pytest.mark.slow
    def test_every_stage_runs(self, tiny_config, tmp_path):
        results = cmd_pipeline(tiny_config, tmp_path)
        for command in ["simulate", "estimate-dim", "train-embed", "train-field", "analyze-equilibria",
                        "analyze-chaos", "analyze-cycles", "baseline", "compare-smoothness"]:
            assert command in results
        for stage in ["simulate", "dimension", "embed/smooth", "field/smooth", "equilibria/smooth",
                      "chaos/smooth", "cycles/smooth", "embed/baseline", "field/baseline",
                      "equilibria/baseline", "smoothness"]:
            verify_stage(tmp_path, stage)
        assert set(results["compare-smoothness"]["medians"]) == {"SM_1,1", "SM_2,1", "SM_1,inf", "SM_2,inf"}

    def test_dry_run(self, tiny_config, tmp_path):
        results = cmd_pipeline(tiny_config, tmp_path / "dry", dry_run=True)
        assert results["simulate"]["dry_run"] is True
        assert not (tmp_path / "dry").exists()
