"""Acceptance-scale runs of the shipped experiment configs (--runslow)."""

import json
from pathlib import Path

import pytest

from gamelab.cli import main

EXPERIMENTS_DIR = Path(__file__).resolve().parents[2] / "configs" / "experiments"

RUNS = [
    ("sweep-gamma", "coupling.yaml"),
    ("study-rate", "degenerate.yaml"),
    ("study-optimality", "degenerate.yaml"),
    ("study-rate", "elliptic_rate.yaml"),
    ("solve-vi", "gradient.yaml"),
    ("study-liminf", "liminf.yaml"),
    ("sweep-mollify", "mollify.yaml"),
    ("solve-vi", "put_oracle.yaml"),
    ("validate", "quadratic_rate.yaml"),
    ("study-rate", "quadratic_rate.yaml"),
    ("study-stops", "stops.yaml"),
]


@pytest.mark.slow
@pytest.mark.parametrize("command,config", RUNS, ids=[f"{c}-{f[:-5]}" for c, f in RUNS])
def test_experiment_passes(cli_runner, tmp_path, command, config):
    result = cli_runner.invoke(
        main, [command, "--config", str(EXPERIMENTS_DIR / config), "--out", str(tmp_path), "-q"]
    )
    assert result.exit_code == 0, result.output
    verdict = json.loads((tmp_path / f"{command}.verdict.json").read_text())
    failed = [c for c in verdict["checks"] if not c["passed"]]
    assert not failed


@pytest.mark.slow
def test_report_over_degenerate_runs(cli_runner, tmp_path):
    config = str(EXPERIMENTS_DIR / "degenerate.yaml")
    for command in ("study-rate", "study-optimality"):
        cli_runner.invoke(main, [command, "--config", config, "--out", str(tmp_path), "-q"])
    result = cli_runner.invoke(main, ["report", "--out", str(tmp_path)])
    assert result.exit_code == 0, result.output
    report = json.loads((tmp_path / "report.json").read_text())
    assert report["n_pass"] == 2


@pytest.mark.slow
def test_quadratic_rate_is_weighted(cli_runner, tmp_path):
    config = str(EXPERIMENTS_DIR / "quadratic_rate.yaml")
    args = ["study-rate", "--config", config, "--out", str(tmp_path), "-q"]
    result = cli_runner.invoke(main, args)
    assert result.exit_code == 0, result.output
    report = json.loads((tmp_path / "study_rate.json").read_text())["report"]
    assert "differences weighted by (1+|x|^2)^1" in report["notes"]
    assert report["fit"]["slope"] >= 0.8
