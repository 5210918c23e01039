"""Tests for interpolated value fields."""

import numpy as np
import pytest

from gamelab.stopping.value_field import GridField, ValueField
from gamelab.vi.grid import GridParams, ValueGrid


@pytest.fixture
def linear_grid():
    """u = 2 + x + t and g = 1 on [0, 1] x [-1, 1]."""
    t = np.array([0.0, 1.0])
    x = np.linspace(-1.0, 1.0, 5)
    u = 2.0 + x[None, :] + t[:, None]
    shape = u.shape
    return ValueGrid(
        t_nodes=t,
        axes=(x,),
        u=u,
        g=np.ones(shape),
        f=np.ones(2),
        grad=np.ones(shape + (1,)),
        residual=np.zeros(shape),
        regions=np.zeros(shape, dtype=np.int8),
        gamma=0.25,
        params=GridParams(n_time=1, n_space=4, half_width=1.0),
    )


class TestGridField:
    def test_exact_on_linear_data(self, linear_grid):
        field = ValueField(linear_grid)
        out = field(0.5, np.array([[0.25], [-0.75]]))
        np.testing.assert_allclose(out, [2.75, 1.75])
        assert field.extrapolations == 0
        assert field.gamma == 0.25

    def test_clamps_and_counts(self, linear_grid):
        field = GridField(linear_grid, linear_grid.u)
        out = field(np.array([0.0, 0.0]), np.array([[5.0], [0.0]]))
        np.testing.assert_allclose(out, [3.0, 2.0])
        assert field.extrapolations == 1
        assert field.reset_count() == 1
        assert field.extrapolations == 0

    def test_obstacle_field(self, linear_grid):
        field = ValueField(linear_grid)
        np.testing.assert_allclose(field.obstacle(0.3, np.zeros((3, 1))), 1.0)

    def test_interpolation_error_vanishes_on_linear_data(self, linear_grid):
        field = ValueField(linear_grid)
        assert field.interpolation_error() == 0.0
        assert field.default_tol() == 0.0

    def test_interpolation_error_on_curvature(self, linear_grid):
        x = linear_grid.axes[0]
        linear_grid.u = np.stack([x**2, x**2])
        field = ValueField(linear_grid)
        assert field.interpolation_error() == pytest.approx(0.5 / 8)
