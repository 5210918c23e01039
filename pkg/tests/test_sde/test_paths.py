"""Tests for cadlag path helpers."""

import numpy as np
import pytest

from gamelab.exceptions import GridMismatchError, InvariantViolationError
from gamelab.sde.paths import CadlagPath, left_limit, sup_distance

TIMES = np.array([0.0, 0.5, 1.0])


def _path(values, pre=None, flags=None, times=TIMES):
    values = np.asarray(values, dtype=float).reshape(-1, 1)
    pre = values.copy() if pre is None else np.asarray(pre, dtype=float).reshape(-1, 1)
    flags = np.zeros(len(values), dtype=bool) if flags is None else np.asarray(flags)
    return CadlagPath(times, values, pre, flags)


class TestSupDistance:
    def test_uses_both_limits(self):
        a = _path([0.0, 1.0, 1.0], pre=[0.0, 0.0, 1.0], flags=[False, True, False])
        b = _path([0.0, 1.0, 1.0], pre=[0.0, 3.0, 1.0], flags=[False, True, False])
        assert sup_distance(a, b) == 3.0
        assert sup_distance(a, b, p=2.0) == 9.0

    def test_grid_mismatch(self):
        a = _path([0.0, 0.0, 0.0])
        b = _path([0.0, 0.0], times=np.array([0.0, 1.0]))
        with pytest.raises(GridMismatchError):
            sup_distance(a, b)


class TestCadlagPath:
    def test_left_limit(self):
        path = _path([0.0, 2.0, 2.0], pre=[0.0, 0.5, 2.0], flags=[False, True, False])
        np.testing.assert_allclose(left_limit(path, 0.5), [0.5])

    def test_arrays_read_only(self):
        path = _path([0.0, 1.0, 2.0])
        with pytest.raises(ValueError):
            path.values[0, 0] = 5.0

    def test_unflagged_jump(self):
        path = _path([0.0, 2.0, 2.0], pre=[0.0, 0.5, 2.0])
        with pytest.raises(InvariantViolationError, match="node 1"):
            path.check_jumps()

    def test_table(self):
        path = _path([0.0, 2.0, 2.0], pre=[0.0, 0.5, 2.0], flags=[False, True, False])
        header, rows = path.table()
        assert header == ["s", "x_1", "pre_x_1", "jump_flag"]
        assert rows[1] == [0.5, 2.0, 0.5, 1]
