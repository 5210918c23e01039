"""Tests for Monte Carlo stopping studies on the sigma = 0 benchmark."""

import numpy as np
import pytest

from gamelab.exceptions import (
    ConfigurationError,
    ControlClassError,
    InsufficientSweepPointsError,
)
from gamelab.lab.studies import (
    optimality_gap_study,
    stop_structure_study,
    stopping_liminf_check,
)
from gamelab.model.controls import ControlFamily
from gamelab.vi.grid import GridParams, ValueGrid


def abs_value(t, x):
    return np.abs(x[..., 0])


def abs_plus_square(t, x):
    """Touches g = |x| only at the origin."""
    return np.abs(x[..., 0]) + x[..., 0] ** 2


def obstacle_grid(gamma: float) -> ValueGrid:
    """u = g = |x| on [0, 1] x [-2, 2]."""
    t = np.array([0.0, 1.0])
    x = np.linspace(-2.0, 2.0, 9)
    u = np.stack([np.abs(x), np.abs(x)])
    return ValueGrid(
        t_nodes=t,
        axes=(x,),
        u=u,
        g=u.copy(),
        f=np.ones(2),
        grad=np.zeros(u.shape + (1,)),
        residual=np.zeros(u.shape),
        regions=np.ones(u.shape, dtype=np.int8),
        gamma=gamma,
        params=GridParams(n_time=1, n_space=8, half_width=2.0),
    )


@pytest.fixture
def density_controls():
    return [ControlFamily()] + [
        ControlFamily(kind="constant_density", rate=0.1 * i) for i in range(1, 10)
    ]


class TestOptimalityGap:
    def test_no_control_beats_obstacle_value(self, degenerate_spec, density_controls):
        report = optimality_gap_study(
            degenerate_spec, density_controls, 5, abs_value, degenerate_spec.g,
            reference_value=0.5, x0=0.5, n_steps=10,
        )
        assert report.passed
        assert len(report.rows) == 10
        assert report.metrics["zero_gap"] == pytest.approx(0.0)
        assert report.metrics["min_gap"] == pytest.approx(0.0)

    def test_gamma_companion_carries_the_noise(self, degenerate_spec):
        """sigma = 0: base paths are deterministic, X^gamma paths are not."""
        common = dict(x0=0.5, n_steps=10, min_controls=1)
        base = optimality_gap_study(
            degenerate_spec, [ControlFamily()], 20, abs_plus_square, degenerate_spec.g, 0.5,
            **common,
        )
        perturbed = optimality_gap_study(
            degenerate_spec, [ControlFamily()], 20, abs_plus_square, degenerate_spec.g, 0.5,
            gamma=0.1, **common,
        )
        assert base.metrics["gamma"] == 0.0
        assert perturbed.metrics["gamma"] == 0.1
        assert base.rows[0][1] == pytest.approx(0.5)
        assert base.rows[0][2] == 0.0
        assert perturbed.rows[0][2] > 0.0

    def test_too_few_controls(self, degenerate_spec, density_controls):
        with pytest.raises(ConfigurationError) as exc:
            optimality_gap_study(
                degenerate_spec, density_controls[:3], 5, abs_value, degenerate_spec.g, 0.5
            )
        assert exc.value.field_path == "study.controls"

    def test_class_bound_enforced(self, degenerate_spec):
        greedy = [ControlFamily(kind="constant_density", rate=5.0)]
        with pytest.raises(ControlClassError):
            optimality_gap_study(
                degenerate_spec, greedy, 5, abs_value, degenerate_spec.g, 0.5,
                x0=0.5, n_steps=10, min_controls=1,
            )


class TestStopStructure:
    """Left limit in contact, jump out of it: theta* = 0 < tau*."""

    def test_jump_out_of_contact(self, degenerate_spec):
        continuous = [ControlFamily(), ControlFamily(kind="constant_density", rate=0.5)]
        jump = ControlFamily(kind="threshold_push", level=0.0, size=1.0)
        report = stop_structure_study(
            degenerate_spec, abs_plus_square, degenerate_spec.g, continuous, jump,
            n_paths=4, x0=-0.02, n_steps=10, tol=1e-3,
        )
        assert report.metrics["mismatches"] == 0
        assert report.metrics["theta_before_tau_fraction"] == 1.0
        assert report.metrics["fallbacks"] == 0
        assert report.passed
        assert len(report.rows) == 4
        assert report.rows[0][1:4] == [1.0, 0.0, 0.0]

    def test_jumping_family_rejected_as_continuous(self, degenerate_spec):
        jump = ControlFamily(kind="jump_at", time=0.5, size=1.0)
        with pytest.raises(ConfigurationError, match="can jump"):
            stop_structure_study(
                degenerate_spec, abs_plus_square, degenerate_spec.g, [jump], jump, 2
            )


class TestLiminf:
    @pytest.fixture
    def grids(self):
        return {g: obstacle_grid(g) for g in (0.2, 0.1, 0.05)}

    def test_no_violations_when_value_is_payoff(self, degenerate_spec, grids):
        report = stopping_liminf_check(
            degenerate_spec, ControlFamily(), grids, n_paths=6, x0=0.5, n_steps=10,
            reference="payoff",
        )
        assert report.passed
        assert report.metrics["violations"] == 0
        assert report.metrics["tail"] == [0.2, 0.1, 0.05]
        assert report.metrics["slack"] == pytest.approx(0.2)
        assert len(report.rows) == 6

    def test_default_reference_is_smallest_gamma(self, degenerate_spec, grids):
        report = stopping_liminf_check(
            degenerate_spec, ControlFamily(), grids, n_paths=3, x0=0.5, n_steps=10, last=2
        )
        assert report.metrics["tail"] == [0.1, 0.05]
        assert report.passed

    def test_too_few_grids(self, degenerate_spec, grids):
        with pytest.raises(InsufficientSweepPointsError):
            stopping_liminf_check(degenerate_spec, ControlFamily(), grids, n_paths=3, last=4)
