"""Tests for sweep rows and log-log fits."""

import numpy as np
import pytest

from gamelab.exceptions import DegenerateFitError
from gamelab.lab.fitting import SweepReport, SweepRow, fit_loglog
from gamelab.lab.sweeps import report_from_distances

GAMMAS = [0.5, 0.25, 0.125, 0.0625, 0.03125]


def power_rows(exponent, scale=2.0):
    return [SweepRow((g,), "stat", scale * g**exponent) for g in GAMMAS]


class TestFitLogLog:
    def test_exact_power_law(self):
        fit = fit_loglog(power_rows(1.0))
        assert fit.slope == pytest.approx(1.0)
        assert fit.r_squared == pytest.approx(1.0)
        assert fit.intercept == pytest.approx(np.log(2.0))
        assert fit.predict(0.1) == pytest.approx(0.2)
        assert fit.n_used == 5

    def test_noisy_rows_left_out(self):
        rows = power_rows(2.0) + [SweepRow((0.9,), "stat", 100.0, stderr=50.0)]
        fit = fit_loglog(rows)
        assert fit.n_used == 5
        assert fit.slope == pytest.approx(2.0)

    def test_noise_floor(self):
        rows = [SweepRow((g,), "stat", 1e-12) for g in GAMMAS]
        with pytest.raises(DegenerateFitError, match="noise floor"):
            fit_loglog(rows)

    def test_single_parameter(self):
        rows = [SweepRow((0.5,), "stat", 1.0), SweepRow((0.5,), "stat", 2.0)]
        with pytest.raises(DegenerateFitError, match="one sweep parameter"):
            fit_loglog(rows)


class TestSweepReport:
    def test_rows_sorted_and_labelled(self):
        report = SweepReport("demo", ("gamma",), power_rows(1.0))
        assert [r.param[0] for r in report.rows] == sorted(GAMMAS)
        label, statistic, mean, stderr, n = report.long_rows()[0]
        assert label == "gamma=0.03125"
        assert statistic == "stat"
        assert mean == pytest.approx(0.0625)

    def test_passed_follows_checks(self):
        report = SweepReport("demo", ("gamma",))
        report.check("ok", True)
        assert report.passed
        report.check("bad", False, 3.0, 1.0)
        assert not report.passed
        assert report.to_dict()["checks"][1] == {
            "name": "bad", "passed": False, "value": 3.0, "threshold": 1.0, "witness": None,
        }


class TestReportFromDistances:
    """Per-path sup distances proportional to gamma."""

    @pytest.fixture
    def distances(self):
        rng = np.random.default_rng(0)
        return np.outer(rng.uniform(1.0, 2.0, 200), GAMMAS)

    def test_linear_moments(self, distances):
        report = report_from_distances(distances, GAMMAS, p=1.0)
        assert report.fit.slope == pytest.approx(1.0)
        assert report.passed
        assert {c.name for c in report.checks} == {"slope_p1", "r_squared_p1"}

    def test_second_moment_doubles_slope(self, distances):
        report = report_from_distances(distances, GAMMAS, p=2.0)
        assert report.fit.slope == pytest.approx(2.0)
        assert report.checks[0].threshold == [pytest.approx(1.8), pytest.approx(2.2)]
        assert report.passed

    def test_wrong_rate_fails(self):
        distances = np.outer(np.linspace(1.0, 2.0, 50), np.sqrt(GAMMAS))
        report = report_from_distances(distances, GAMMAS, p=1.0)
        assert report.fit.slope == pytest.approx(0.5)
        assert not report.passed
