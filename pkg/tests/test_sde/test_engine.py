"""Tests for coupled Euler-Maruyama simulation."""

import numpy as np
import pytest

from gamelab.exceptions import (
    ConfigurationError,
    GridMismatchError,
    InvariantViolationError,
    NumericError,
)
from gamelab.model.controls import ControlFamily, make_control
from gamelab.sde.driver import BrownianDriver
from gamelab.sde.engine import (
    map_path_blocks,
    mc_estimate,
    moment_estimate,
    simulate_controlled,
    simulate_coupled,
    time_grid,
)


class TestDeterminism:
    """Same seed and path index give the same path."""

    def test_repeatable(self, put_spec):
        a = simulate_coupled(put_spec, ControlFamily(), 11, [0.1], [0.0], n_steps=50)
        b = simulate_coupled(put_spec, ControlFamily(), 11, [0.1], [0.0], n_steps=50)
        np.testing.assert_array_equal(a.base.values, b.base.values)
        np.testing.assert_array_equal(a.perturbed[0.1].values, b.perturbed[0.1].values)

    def test_path_index_selects_substream(self, put_spec):
        a = simulate_coupled(put_spec, ControlFamily(), 11, [0.1], [0.0], n_steps=50)
        b = simulate_coupled(put_spec, ControlFamily(), 11, [0.1], [0.0], n_steps=50, path_index=1)
        assert not np.array_equal(a.base.values, b.base.values)

    def test_driver_matches_block_streams(self, put_spec):
        driver = BrownianDriver.generate(5, 20, 0.05, 1, 1, path_index=3)
        again = BrownianDriver.generate(5, 20, 0.05, 1, 1, path_index=3)
        np.testing.assert_array_equal(driver.dW, again.dW)
        header, rows = driver.table()
        assert header == ["s", "dW_1", "dWtilde_1"]
        assert len(rows) == 20
        assert rows[0][0] == pytest.approx(0.05)

    def test_thread_count_does_not_change_results(self, put_spec):
        def run(threads, block_size):
            parts = map_path_blocks(
                lambda block: block.sup_dist[1], put_spec, ControlFamily(), 3, [0.2], [0.0],
                n_paths=10, n_steps=20, record=False, block_size=block_size, threads=threads,
            )
            return np.concatenate(parts)

        serial = run(1, 10)
        np.testing.assert_array_equal(serial, run(3, 3))
        np.testing.assert_array_equal(serial, run(1, 4))


class TestCoupling:
    """Companions share the driver and the control."""

    def test_zero_gamma_is_base(self, put_spec):
        sample = simulate_coupled(put_spec, ControlFamily(), 2, [0.0, 0.25], [0.0], n_steps=30)
        assert sample.perturbed[0.0] is sample.base

    def test_degenerate_dynamics_scale_with_gamma(self, degenerate_spec):
        sample = simulate_coupled(degenerate_spec, ControlFamily(), 4, [0.1, 0.2], [0.5], 40)
        np.testing.assert_allclose(sample.base.values, 0.5)
        d1 = sample.perturbed[0.1].values - 0.5
        d2 = sample.perturbed[0.2].values - 0.5
        np.testing.assert_allclose(d2, 2.0 * d1, atol=1e-12)
        expected = 0.1 * np.abs(np.cumsum(sample.driver.dWtilde[:, 0])).max()
        assert np.abs(d1).max() == pytest.approx(expected)

    def test_moment_estimate_on_samples(self, degenerate_spec):
        samples = [
            simulate_coupled(degenerate_spec, ControlFamily(), 4, [0.1], [0.0], 20, path_index=i)
            for i in range(5)
        ]
        est = moment_estimate(samples, 0.1, p=2.0)
        assert est.n == 5
        assert est.mean > 0
        with pytest.raises(ConfigurationError, match="unknown statistic"):
            moment_estimate(samples, 0.1, statistic="median")

    def test_gamma_out_of_range(self, put_spec):
        with pytest.raises(ConfigurationError, match=r"\[0, 1\)"):
            simulate_coupled(put_spec, ControlFamily(), 1, [1.0], [0.0], 10)

    def test_empty_gammas(self, put_spec):
        with pytest.raises(ConfigurationError):
            simulate_coupled(put_spec, ControlFamily(), 1, [], [0.0], 10)


class TestJumps:
    """Atoms appear as the gap between right and left limits."""

    def test_jump_at_interior_time(self, put_spec):
        family = ControlFamily(kind="jump_at", time=0.5, size=1.0)
        sample = simulate_coupled(put_spec, family, 7, [0.1], [0.0], n_steps=10)
        path = sample.base
        path.check_jumps()
        sample.perturbed[0.1].check_jumps()
        assert path.jump_flags.tolist().count(True) == 1
        assert path.values[5, 0] - path.pre_values[5, 0] == pytest.approx(1.0)

    def test_initial_atom_acts_before_first_step(self, degenerate_spec):
        family = ControlFamily(kind="jump_at", time=0.0, size=2.0)
        path = simulate_coupled(degenerate_spec, family, 1, [0.0], [0.0], n_steps=5).base
        assert path.pre_values[0, 0] == 0.0
        assert path.values[0, 0] == 2.0
        np.testing.assert_allclose(path.values[:, 0], 2.0)

    def test_threshold_push_reads_left_limit(self, degenerate_spec):
        family = ControlFamily(kind="threshold_push", level=0.0, size=1.0)
        path = simulate_coupled(degenerate_spec, family, 1, [0.0], [-0.5], n_steps=5).base
        assert path.control.atoms[0] == 1.0
        assert path.values[0, 0] == pytest.approx(0.5)
        assert path.control.atoms[1:].sum() == 0.0
        path.check_jumps()

    def test_tampered_path_detected(self, degenerate_spec):
        path = simulate_coupled(degenerate_spec, ControlFamily(), 1, [0.0], [0.0], 5).base
        values = path.values.copy()
        values[3, 0] += 1.0
        bad = type(path)(path.times, values, path.pre_values.copy(), path.jump_flags.copy())
        with pytest.raises(InvariantViolationError, match="unflagged jump at node 3"):
            bad.check_jumps()


class TestSimulateControlled:
    def test_matches_coupled_base(self, put_spec):
        driver = BrownianDriver.generate(9, 20, 0.05, 1, 1)
        control = make_control(ControlFamily(kind="constant_density", rate=0.5), time_grid(1.0, 20))
        path = simulate_controlled(put_spec, control, driver, 0.0, [0.0])
        coupled = simulate_coupled(put_spec, control, 9, [0.1], [0.0])
        np.testing.assert_allclose(path.values, coupled.base.values)

    def test_grid_mismatch(self, put_spec):
        driver = BrownianDriver.generate(9, 20, 0.05, 1, 1)
        control = make_control(ControlFamily(), time_grid(1.0, 10))
        with pytest.raises(GridMismatchError):
            simulate_controlled(put_spec, control, driver, 0.0, [0.0])

    def test_blow_up_raises_numeric_error(self, make_spec):
        spec = make_spec(drift={"kind": "affine", "matrix": [[1e200]], "offset": [0.0]})
        driver = BrownianDriver.generate(1, 10, 0.1, 1, 1)
        with pytest.raises(NumericError):
            with np.errstate(over="ignore", invalid="ignore"):
                simulate_controlled(spec, ControlFamily(), driver, 0.0, [1.0])


class TestMcEstimate:
    def test_mean_and_stderr(self):
        est = mc_estimate([1.0, 2.0, 3.0, 4.0])
        assert est.mean == 2.5
        assert est.stderr == pytest.approx(np.std([1, 2, 3, 4], ddof=1) / 2.0)
        assert est.to_dict()["n"] == 4

    def test_needs_two_samples(self):
        with pytest.raises(ConfigurationError):
            mc_estimate([1.0])
