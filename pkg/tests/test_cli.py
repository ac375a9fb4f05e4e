"""
Tests for the command-line interface.
"""

import logging
from pathlib import Path

import pytest

from strtrend.cli import build_parser, dispatch


def _fast_flags(synthetic_dir, tmp_path):
    return [
        "--data", str(synthetic_dir),
        "--set", "experiment.split=[16, 4, 4]",
        "--set", "experiment.window_size=3",
        "--set", "data.select_active=false",
        "--set", "model.hidden_size=16",
        "--set", "model.num_heads=2",
        "--set", "model.num_layers=1",
        "--set", "train.max_epochs=2",
        "--set", f"backend.cache_dir={tmp_path / 'cache'}",
    ]


def test_synth_writes_four_tables(tmp_path, capsys):
    code = dispatch(["synth", "--regions", "5", "--months", "12", "--seed", "1", "--out", str(tmp_path)])
    assert code == 0
    printed = capsys.readouterr().out.split()
    assert len(printed) == 4
    assert all(Path(p).exists() for p in printed)
    assert len(list(tmp_path.iterdir())) == 4


def test_missing_config_file(tmp_path, capsys):
    assert dispatch(["train", "--config", str(tmp_path / "nope.yaml")]) == 1
    assert "not found" in capsys.readouterr().err


def test_unknown_flag():
    assert dispatch(["train", "--no-such-flag"]) == 2


def test_subcommand_required():
    with pytest.raises(SystemExit):
        build_parser().parse_args([])


def test_override_is_echoed(synthetic_dir, tmp_path, caplog, capsys):
    """The resolved config, overrides included, is logged before anything runs."""
    flags = _fast_flags(synthetic_dir, tmp_path) + ["--set", "model.architecture=TRANSFORMER", "--dry-run"]
    with caplog.at_level(logging.INFO, logger="strtrend"):
        assert dispatch(["train"] + flags) == 0
    assert "architecture: TRANSFORMER" in caplog.text
    assert capsys.readouterr().out.startswith("ok: 8 regions")


def test_bad_override(tmp_path, capsys):
    assert dispatch(["train", "--set", "model.architecture=GRU", "--dry-run"]) == 1
    assert "ConfigurationError" in capsys.readouterr().err


def test_dry_run_split_mismatch(synthetic_dir, capsys):
    code = dispatch(["ingest", "--data", str(synthetic_dir), "--set", "data.select_active=false", "--dry-run"])
    assert code == 1
    assert "split" in capsys.readouterr().err


def test_ingest_writes_summary(synthetic_dir, tmp_path):
    out = tmp_path / "ingest"
    code = dispatch(["ingest", "--data", str(synthetic_dir), "--set", "experiment.split=[16, 4, 4]", "--out", str(out)])
    assert code == 0
    text = (out / "ingest.yaml").read_text(encoding="utf-8")
    assert "threshold:" in text
    assert "label_stats:" in text


def test_prompt_dump(synthetic_dir, tmp_path, capsys):
    out = tmp_path / "prompts"
    code = dispatch(["prompt"] + _fast_flags(synthetic_dir, tmp_path) + ["--out", str(out)])
    assert code == 0
    assert capsys.readouterr().out.strip() == f"wrote {24 * 8 * 3} prompts to {out}"


def test_train_evaluate_report(synthetic_dir, tmp_path, capsys):
    """train writes a run directory that evaluate and report can read back."""
    flags = _fast_flags(synthetic_dir, tmp_path)
    runs = tmp_path / "runs"
    assert dispatch(["train"] + flags + ["--out", str(runs)]) == 0
    assert (runs / "train" / "checkpoint.pt").exists()
    assert "total_rmse=" in capsys.readouterr().out

    code = dispatch(["evaluate"] + flags + ["--checkpoint", str(runs / "train" / "checkpoint.pt"), "--raw"])
    assert code == 0
    assert capsys.readouterr().out.startswith("test (raw):")

    assert dispatch(["report", "--runs", str(tmp_path), "--out", str(tmp_path / "report")]) == 0
    assert (tmp_path / "report" / "runs.csv").exists()


def test_malformed_config_exits_one(tmp_path, capsys):
    """A broken YAML file is reported on one line with exit status 1."""
    path = tmp_path / "broken.yaml"
    path.write_text("model: {hidden_size: 16\n")
    assert dispatch(["train", "--config", str(path), "--dry-run"]) == 1
    err = capsys.readouterr().err
    assert "ConfigurationError" in err
    assert "Traceback" not in err


def test_mistyped_override_exits_one(capsys):
    assert dispatch(["train", "--set", "experiment.window_size=six", "--dry-run"]) == 1
    assert "ConfigurationError" in capsys.readouterr().err
