"""CLI tests: exit statuses, artifacts and verdicts of the gamelab commands."""

import json

import pytest

from gamelab.cli import main
from gamelab.commands._common import _threads
from gamelab.concurrency import THREADS_ENV
from gamelab.core.artifacts import read_csv

SMALL_SIM = {"simulation": {"n_steps": 20, "n_paths": 10, "gammas": [0.1]}}


def run(cli_runner, *args):
    return cli_runner.invoke(main, [str(a) for a in args])


# ── Top level ─────────────────────────────────────────────────────────


class TestMain:
    def test_help_lists_commands(self, cli_runner):
        result = run(cli_runner, "--help")
        assert result.exit_code == 0
        for name in ("simulate", "solve-vi", "sweep-gamma", "study-liminf", "report"):
            assert name in result.output

    def test_version(self, cli_runner):
        result = run(cli_runner, "--version")
        assert result.exit_code == 0
        assert "gamelab" in result.output


# ── validate ──────────────────────────────────────────────────────────


class TestValidate:
    def test_conforming_spec_exits_zero(self, cli_runner, write_config, tmp_path):
        result = run(cli_runner, "validate", "--config", write_config(), "-q")
        assert result.exit_code == 0, result.output
        verdict = json.loads((tmp_path / "out" / "validate.verdict.json").read_text())
        assert verdict["passed"] is True
        assert verdict["artifacts"] == ["assumptions.json"]
        assert "gradient_ratio" in {c["name"] for c in verdict["checks"]}

    def test_failed_check_exits_two(self, cli_runner, write_config, spec_doc, tmp_path):
        spec_doc["payoffs"]["f"] = {"kind": "constant", "value": 0.5}
        result = run(cli_runner, "validate", "--config", write_config(spec=spec_doc), "-q")
        assert result.exit_code == 2
        verdict = json.loads((tmp_path / "out" / "validate.verdict.json").read_text())
        failed = {c["name"] for c in verdict["checks"] if not c["passed"]}
        assert "gradient_ratio" in failed

    def test_out_flag_overrides_config(self, cli_runner, write_config, tmp_path):
        target = tmp_path / "elsewhere"
        result = run(cli_runner, "validate", "--config", write_config(), "--out", target, "-q")
        assert result.exit_code == 0
        assert (target / "validate.verdict.json").exists()
        assert not (tmp_path / "out").exists()

    def test_negative_payoff_is_execution_error(self, cli_runner, write_config, spec_doc):
        spec_doc["payoffs"]["g"] = {"kind": "constant", "value": -1.0}
        result = run(cli_runner, "validate", "--config", write_config(spec=spec_doc), "-q")
        assert result.exit_code == 1


# ── Schema errors ─────────────────────────────────────────────────────


class TestSchemaErrors:
    def test_unknown_key_exits_three(self, cli_runner, write_config):
        result = run(cli_runner, "simulate", "--config", write_config({"simulaton": {}}))
        assert result.exit_code == 3

    def test_missing_config_exits_three(self, cli_runner, tmp_path):
        result = run(cli_runner, "simulate", "--config", tmp_path / "absent.yaml")
        assert result.exit_code == 3

    def test_bad_spec_exits_three(self, cli_runner, write_config, spec_doc):
        spec_doc["horizon"] = "one"
        result = run(cli_runner, "validate", "--config", write_config(spec=spec_doc))
        assert result.exit_code == 3

    def test_too_few_gammas_exits_three(self, cli_runner, write_config):
        config = {"simulation": {"n_paths": 1000, "gammas": [0.2, 0.1]}}
        result = run(cli_runner, "sweep-gamma", "--config", write_config(config))
        assert result.exit_code == 3


# ── simulate ──────────────────────────────────────────────────────────


class TestSimulate:
    def test_writes_paths_and_moments(self, cli_runner, write_config, tmp_path):
        config = write_config(SMALL_SIM)
        result = run(cli_runner, "simulate", "--config", config, "--paths", 2, "-q")
        assert result.exit_code == 0, result.output
        out = tmp_path / "out"
        meta, header, rows = read_csv(out / "paths.csv")
        assert meta["seed"] == "1"
        assert header[:3] == ["path_id", "gamma", "s"]
        # 2 exported paths x (base + one gamma) x 21 nodes
        assert len(rows) == 84
        _, moment_header, moments = read_csv(out / "moments.csv")
        assert moment_header == ["gamma", "p", "mean", "stderr", "n"]
        assert len(moments) == 1
        verdict = json.loads((out / "simulate.verdict.json").read_text())
        assert {c["name"] for c in verdict["checks"]} == {"jump_bookkeeping", "finite_moments"}
        assert meta["config_hash"] == verdict["config_hash"]

    def test_same_seed_is_byte_identical(self, cli_runner, write_config, tmp_path):
        config = write_config(SMALL_SIM)
        for name in ("a", "b"):
            assert run(cli_runner, "simulate", "--config", config, "--out", tmp_path / name,
                       "-q").exit_code == 0
        for artifact in ("paths.csv", "drivers.csv", "moments.csv", "simulate.verdict.json"):
            first, second = (tmp_path / name / artifact for name in ("a", "b"))
            assert first.read_bytes() == second.read_bytes()

    def test_seed_flag_changes_hash(self, cli_runner, write_config, tmp_path):
        config = write_config(SMALL_SIM)
        run(cli_runner, "simulate", "--config", config, "--out", tmp_path / "a", "-q")
        run(cli_runner, "simulate", "--config", config, "--out", tmp_path / "b", "--seed", 2, "-q")
        first = json.loads((tmp_path / "a" / "simulate.verdict.json").read_text())
        second = json.loads((tmp_path / "b" / "simulate.verdict.json").read_text())
        assert second["seed"] == 2
        assert first["config_hash"] != second["config_hash"]

    def test_threads_do_not_change_output(self, cli_runner, write_config, tmp_path):
        config = write_config(SMALL_SIM)
        run(cli_runner, "simulate", "--config", config, "--out", tmp_path / "a", "-q")
        run(cli_runner, "simulate", "--config", config, "--out", tmp_path / "b", "--threads", 3,
            "-q")
        first, second = (tmp_path / name / "moments.csv" for name in ("a", "b"))
        assert first.read_bytes() == second.read_bytes()


# ── solve-vi ──────────────────────────────────────────────────────────


class TestSolveVi:
    def test_put_solve_with_oracle(self, cli_runner, write_config, tmp_path):
        config = write_config({
            "simulation": {"gammas": [0.1]},
            "grid": {"n_time": 50, "n_space": 60, "half_width": 3.0},
            "tolerances": {"oracle_rel_tol": 0.05},
            "study": {"probe_points": [-1.0, -0.5, 0.0], "oracle_steps": 1000},
        })
        result = run(cli_runner, "solve-vi", "--config", config, "-q")
        assert result.exit_code == 0, result.output
        out = tmp_path / "out"
        verdict = json.loads((out / "solve-vi.verdict.json").read_text())
        names = {c["name"] for c in verdict["checks"]}
        assert {"residual_minmax_p99_g0.1", "dominance_g0.1", "oracle_rel_error_g0.1"} <= names
        assert (out / "value_grid_g0.1.boundary.csv").exists()
        _, header, rows = read_csv(out / "value_grid_g0.1.oracle.csv")
        assert header == ["x", "u", "oracle", "rel_error"]
        assert len(rows) == 3

    def test_no_gammas_exits_one(self, cli_runner, write_config):
        result = run(cli_runner, "solve-vi", "--config", write_config(), "-q")
        assert result.exit_code == 1


# ── study commands ────────────────────────────────────────────────────


class TestStudies:
    def test_stops_without_jump_control_exits_one(self, cli_runner, write_config):
        config = write_config({"study": {"reference": "payoff"}})
        result = run(cli_runner, "study-stops", "--config", config, "-q")
        assert result.exit_code == 1

    def test_liminf_needs_gammas(self, cli_runner, write_config):
        config = write_config({"simulation": {"gammas": [0.1]}})
        result = run(cli_runner, "study-liminf", "--config", config, "-q")
        assert result.exit_code == 3

    def test_optimality_against_payoff(self, cli_runner, write_config, spec_doc, tmp_path):
        spec_doc["diffusion"] = {"kind": "zero", "d": 1, "d_prime": 1}
        spec_doc["payoffs"]["f"] = {"kind": "constant", "value": 1.0}
        spec_doc["payoffs"]["g"] = {"kind": "abs", "scale": 1.0}
        config = write_config({
            "simulation": {"n_steps": 20, "n_paths": 20},
            "study": {
                "reference": "payoff",
                "min_controls": 2,
                "controls": [{"kind": "zero"}, {"kind": "constant_density", "rate": 0.5}],
            },
        }, spec=spec_doc)
        result = run(cli_runner, "study-optimality", "--config", config, "-q")
        assert result.exit_code == 0, result.output
        data = json.loads((tmp_path / "out" / "study_optimality.json").read_text())
        assert data["metrics"]["reference_value"] == pytest.approx(0.0)
        assert data["passed"] is True


# ── report ────────────────────────────────────────────────────────────


class TestReport:
    def test_consolidates_passing_verdicts(self, cli_runner, write_config, tmp_path):
        assert run(cli_runner, "validate", "--config", write_config(), "-q").exit_code == 0
        out = tmp_path / "out"
        result = run(cli_runner, "report", "--out", out)
        assert result.exit_code == 0, result.output
        report = json.loads((out / "report.json").read_text())
        assert report["passed"] is True
        assert report["n_pass"] == 1
        meta, header, _ = read_csv(out / "report_checks.csv")
        assert header == ["command", "check", "passed", "value", "threshold"]
        assert meta["config_hash"] == report["config_hash"]

    def test_failed_verdict_exits_two(self, cli_runner, write_config, spec_doc, tmp_path):
        spec_doc["payoffs"]["f"] = {"kind": "constant", "value": 0.5}
        run(cli_runner, "validate", "--config", write_config(spec=spec_doc), "-q")
        result = run(cli_runner, "report", "--out", tmp_path / "out")
        assert result.exit_code == 2
        report = json.loads((tmp_path / "out" / "report.json").read_text())
        assert report["failures"]

    def test_hash_mismatch_exits_one(self, cli_runner, write_config, tmp_path):
        run(cli_runner, "validate", "--config", write_config(), "-q")
        artifact = tmp_path / "out" / "assumptions.json"
        data = json.loads(artifact.read_text())
        data["config_hash"] = "0" * 16
        artifact.write_text(json.dumps(data))
        result = run(cli_runner, "report", "--out", tmp_path / "out")
        assert result.exit_code == 1

    def test_empty_directory_exits_one(self, cli_runner, tmp_path):
        result = run(cli_runner, "report", "--out", tmp_path)
        assert result.exit_code == 1


# ── Thread precedence ─────────────────────────────────────────────────


class TestThreads:
    def test_flag_wins(self, monkeypatch):
        monkeypatch.setenv(THREADS_ENV, "5")
        assert _threads(2, 3) == 2

    def test_environment_beats_config(self, monkeypatch):
        monkeypatch.setenv(THREADS_ENV, "5")
        assert _threads(None, 3) == 5

    def test_config_then_default(self, monkeypatch):
        monkeypatch.delenv(THREADS_ENV, raising=False)
        assert _threads(None, 3) == 3
        assert _threads(None, None) == 1
