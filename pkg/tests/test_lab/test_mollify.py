"""Tests for truncated, mollified and cut-off payoffs."""

import numpy as np
import pytest

from gamelab.exceptions import ConfigurationError
from gamelab.lab.mollify import bump_kernel, mollify_payoffs, smooth_step
from gamelab.lab.sweeps import mollify_sweep
from gamelab.model.spec import GameSpec, load_spec

from tests.conftest import SPECS_DIR


@pytest.fixture(scope="module")
def capped_abs():
    """g = min(|x|, 3), f = 1."""
    return load_spec(SPECS_DIR / "capped_abs.json")


class TestKernels:
    def test_bump_sums_to_one(self):
        kernel = bump_kernel(0.25, 0.025)
        assert kernel.sum() == pytest.approx(1.0)
        np.testing.assert_allclose(kernel, kernel[::-1])
        assert np.all(kernel >= 0)

    def test_smooth_step(self):
        out = smooth_step(np.array([-1.0, 0.0, 0.5, 1.0, 2.0]))
        np.testing.assert_allclose(out, [0.0, 0.0, 0.5, 1.0, 1.0])
        s = np.linspace(0.0, 1.0, 1001)
        assert np.max(np.diff(smooth_step(s))) / 0.001 <= 2.0 + 1e-3


class TestMollifyPayoffs:
    def test_band_restores_gradient_bound(self, capped_abs):
        mp = mollify_payoffs(capped_abs, j=4, k=16, m=3)
        assert mp.band_width == 8.0
        assert mp.inner_radius == 8.0
        assert mp.gradient_max() <= mp.f_min * (1 + 1e-3)
        assert mp.f_min == pytest.approx(1.0)
        assert mp.kernel_mass == pytest.approx(1.0)

    def test_error_shrinks_with_radius(self, capped_abs):
        coarse = mollify_payoffs(capped_abs, j=2, k=16, m=3).sup_error(capped_abs)
        fine = mollify_payoffs(capped_abs, j=8, k=16, m=3).sup_error(capped_abs)
        assert fine < coarse
        assert fine <= 0.6 / 8

    def test_cutoff_vanishes_outside_ball(self, capped_abs):
        mp = mollify_payoffs(capped_abs, j=4, k=16, m=3)
        outside = np.abs(mp.x) >= 16.0
        np.testing.assert_allclose(np.asarray(mp.g.values)[outside], 0.0, atol=1e-12)

    def test_truncation_caps_payoff(self, capped_abs):
        mp = mollify_payoffs(capped_abs, j=4, k=16, m=1.5)
        assert max(mp.g.values) <= 1.5 + 1e-12

    def test_spec_for(self, capped_abs):
        mp = mollify_payoffs(capped_abs, j=4, k=16, m=3)
        spec = mp.spec_for(capped_abs)
        assert spec.name == "capped_abs[j=4,k=16,m=3]"
        assert float(spec.g(0.0, np.array([[2.0]]))[0]) == pytest.approx(2.0, abs=1e-9)
        assert spec.sigma is capped_abs.sigma

    def test_no_band_found(self, make_spec):
        spec = make_spec(payoffs={
            "f": {"kind": "constant", "value": 1.0},
            "g": {"kind": "constant", "value": 1.0},
        })
        with pytest.raises(ConfigurationError, match="no cutoff band"):
            mollify_payoffs(spec, j=1, k=1, m=10)

    @pytest.mark.parametrize(
        "j, k, m",
        [(0, 4, 1.0), (2, 0, 1.0), (2, 4, 0.0)],
    )
    def test_invalid_trebles(self, capped_abs, j, k, m):
        with pytest.raises(ConfigurationError):
            mollify_payoffs(capped_abs, j=j, k=k, m=m)

    def test_two_dimensional_spec(self, spec_doc):
        spec_doc["dims"] = {"d": 2, "d_prime": 2}
        spec_doc["drift"] = {"kind": "zero", "d": 2}
        spec_doc["diffusion"] = {"kind": "constant", "matrix": [[0.4, 0.0], [0.0, 0.4]]}
        spec_doc["payoffs"]["g"] = {"kind": "abs", "scale": 1.0}
        with pytest.raises(ConfigurationError, match="d = 1"):
            mollify_payoffs(GameSpec.from_dict(spec_doc), j=2, k=4, m=1.0)


class TestMollifySweep:
    def test_sweep_checks(self, capped_abs):
        report, payoffs = mollify_sweep(capped_abs, js=[8, 2, 4], ks=[16], ms=[3])
        assert [mp.j for mp in payoffs] == [2, 4, 8]
        assert len(report.statistic("sup_error_g")) == 3
        names = {c.name for c in report.checks}
        assert {"sup_error_nonincreasing", "final_sup_error", "gradient_bound",
                "kernel_mass"} <= names
        assert report.passed

    def test_truncation_levels_are_monotone(self, capped_abs):
        report, _ = mollify_sweep(capped_abs, js=[4], ks=[16], ms=[1.5, 3])
        check = next(c for c in report.checks if c.name == "truncation_monotone")
        assert check.passed

    def test_empty_axis(self, capped_abs):
        with pytest.raises(ConfigurationError):
            mollify_sweep(capped_abs, js=[], ks=[16], ms=[3])
