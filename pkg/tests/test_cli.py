"""
Unit Tests for the command-line interface
Run with: pytest tests/test_cli.py -v
"""

import json

import pytest

from scripts.nsv_cli import build_parser, main
from src.exporters import JSONExporter
from src.utils.errors import ProvenanceError, TrainingDivergedError


@pytest.fixture
def config_file(tiny_config, tmp_path):
    """The tiny configuration written as a JSON document."""
    path = tmp_path / "config.json"
    JSONExporter.export(tiny_config, path)
    return path


def last_json_line(text):
    return json.loads(text.strip().splitlines()[-1])


# ============================================================================
# Parsing
# ============================================================================

class TestParser:
    """Test argument parsing."""

    def test_labelled_defaults(self):
        args = build_parser().parse_args(["train-embed"])
        assert args.label == "smooth"
        assert args.dry_run is False
        assert args.seed is None

    def test_compare_labels(self):
        args = build_parser().parse_args(["compare-smoothness", "--labels", "a", "b", "c"])
        assert args.labels == ["a", "b", "c"]

    def test_output_alias(self):
        assert build_parser().parse_args(["simulate", "--output", "runs/x"]).out == "runs/x"

    def test_version(self):
        with pytest.raises(SystemExit) as exc:
            build_parser().parse_args(["--version"])
        assert exc.value.code == 0


# ============================================================================
# Commands and exit codes
# ============================================================================

class TestMain:
    """Test dispatch, output and error reporting."""

    def test_schema(self, capsys):
        assert main(["schema"]) == 0
        schema = json.loads(capsys.readouterr().out)
        assert "seed" in schema["properties"]

    def test_missing_config(self, tmp_path, capsys):
        code = main(["simulate", "--config", str(tmp_path / "nope.json"), "--out", str(tmp_path)])
        assert code == 2
        error = last_json_line(capsys.readouterr().err)
        assert error["error"] == "MissingArtifactError"
        assert error["field"] == "config"

    def test_invalid_seed(self, config_file, tmp_path, capsys):
        code = main(["simulate", "--config", str(config_file), "--seed", "-1", "--out", str(tmp_path)])
        assert code == 2
        assert last_json_line(capsys.readouterr().err)["error"] == "ConfigurationError"

    def test_dry_run(self, config_file, tmp_path, capsys):
        out = tmp_path / "run"
        assert main(["simulate", "--config", str(config_file), "--out", str(out), "--dry-run"]) == 0
        result = json.loads(capsys.readouterr().out)
        assert result["dry_run"] is True
        assert not out.exists()

    def test_labelled_dispatch(self, config_file, tmp_path, mocker, capsys):
        fake = mocker.Mock(return_value={"command": "train-field"})
        mocker.patch.dict("scripts.nsv_cli.LABELLED", {"train-field": fake})
        code = main(["train-field", "--config", str(config_file), "--label", "baseline", "--seed", "9",
                     "--out", str(tmp_path)])
        assert code == 0
        cfg, out, label, dry_run, command_line = fake.call_args.args
        assert cfg.seed == 9
        assert out == str(tmp_path)
        assert label == "baseline"
        assert dry_run is False
        assert command_line[:2] == ["nsv_cli.py", "train-field"]
        assert json.loads(capsys.readouterr().out) == {"command": "train-field"}

    def test_compare_dispatch(self, config_file, tmp_path, mocker):
        fake = mocker.patch("scripts.nsv_cli.cmd_compare_smoothness", return_value={})
        main(["compare-smoothness", "--config", str(config_file), "--labels", "a", "b", "--out", str(tmp_path)])
        assert fake.call_args.args[2] == ["a", "b"]

    def test_provenance_exit_code(self, config_file, tmp_path, mocker, capsys):
        fake = mocker.Mock(side_effect=ProvenanceError("changed", diff={"dataset/x.csv": ("aa", "bb")}))
        mocker.patch.dict("scripts.nsv_cli.LABELLED", {"analyze-chaos": fake})
        code = main(["analyze-chaos", "--config", str(config_file), "--out", str(tmp_path)])
        assert code == 4
        error = last_json_line(capsys.readouterr().err)
        assert error["diff"] == {"dataset/x.csv": {"expected": "aa", "actual": "bb"}}

    def test_runtime_exit_code(self, config_file, tmp_path, mocker, capsys):
        fake = mocker.Mock(side_effect=TrainingDivergedError("loss is nan", step=4))
        mocker.patch.dict("scripts.nsv_cli.LABELLED", {"train-embed": fake})
        assert main(["train-embed", "--config", str(config_file), "--out", str(tmp_path)]) == 3
        assert last_json_line(capsys.readouterr().err)["error"] == "TrainingDivergedError"
