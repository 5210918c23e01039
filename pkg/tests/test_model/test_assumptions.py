"""Tests for sampled assumption checks."""

import numpy as np
import pytest

from gamelab.exceptions import ConfigurationError
from gamelab.model.assumptions import sample_box, validate_assumptions
from gamelab.model.spec import load_spec

from tests.conftest import SPECS_DIR


@pytest.fixture
def box():
    return sample_box(1, 3.0, 400, seed=7)


class TestSampleBox:
    def test_includes_corners(self):
        points = sample_box(2, 1.0, 50, seed=0)
        assert points.shape == (50, 2)
        corners = {tuple(p) for p in points[:4]}
        assert corners == {(-1.0, -1.0), (-1.0, 1.0), (1.0, -1.0), (1.0, 1.0)}
        assert np.all(np.abs(points) <= 1.0)

    def test_deterministic(self):
        np.testing.assert_array_equal(sample_box(1, 2.0, seed=3), sample_box(1, 2.0, seed=3))


class TestValidateAssumptions:
    """Constant estimates and pass/fail per check."""

    def test_put_conforms(self, put_spec, box):
        report = validate_assumptions(put_spec, box)
        assert report.conforming
        assert report.get("gradient_ratio").value <= 1e-5
        assert report.get("lipschitz_sigma").value == pytest.approx(0.0)

    def test_expensive_gradient_fails(self, make_spec, box):
        spec = make_spec(payoffs={"f": {"kind": "constant", "value": 0.5}})
        report = validate_assumptions(spec, box)
        assert not report.conforming
        ratio = report.get("gradient_ratio")
        assert not ratio.passed
        assert ratio.value == pytest.approx(2.0, rel=1e-3)
        assert "x" in ratio.witness and "t" in ratio.witness
        assert not report.get("gradient_compatibility").passed

    def test_growth_over_k1(self, make_spec, box):
        spec = make_spec(payoffs={"g": {"kind": "abs", "scale": 2.0}})
        report = validate_assumptions(spec, box)
        growth = report.get("sublinear_growth")
        assert not growth.passed
        assert growth.value == pytest.approx(6.0 / (1.0 + np.sqrt(3.0)), rel=1e-6)

    def test_quadratic_variant_runs_relaxed_checks(self, make_spec, spec_doc, box):
        profile = {**spec_doc["profile"], "variant": "A51_quadratic", "K5": 10.0}
        report = validate_assumptions(make_spec(profile=profile), box)
        names = {c.name for c in report.checks}
        assert {"quadratic_growth_h", "linear_growth_g", "generator_lower_bound"} <= names
        assert "sublinear_growth" not in names
        assert report.conforming

    def test_sqrt_growth_informational_by_default(self, put_spec, box):
        check = validate_assumptions(put_spec, box).get("sqrt_growth_ib")
        assert not check.required

    def test_too_few_points(self, put_spec):
        with pytest.raises(ConfigurationError, match="at least 100"):
            validate_assumptions(put_spec, np.zeros((10, 1)))

    def test_wrong_dimension(self, put_spec):
        with pytest.raises(ConfigurationError, match="dimension"):
            validate_assumptions(put_spec, np.zeros((200, 2)))

    def test_report_serialises(self, put_spec, box):
        data = validate_assumptions(put_spec, box).to_dict()
        assert data["variant"] == "A22_sublinear"
        assert data["n_samples"] == 400
        assert data["conforming"] is True


class TestShippedQuadraticSpec:
    def test_relaxed_growth_profile_conforms(self):
        spec = load_spec(SPECS_DIR / "quadratic_rate.json")
        assert spec.profile.quadratic
        report = validate_assumptions(spec, sample_box(1, 3.0, 400, seed=0))
        assert report.conforming, [c.name for c in report.checks if c.required and not c.passed]
        assert report.get("quadratic_growth_h").value <= 0.1 + 1e-12
        assert report.get("local_lipschitz_h").passed
        assert report.get("generator_lower_bound").value >= -1.0
