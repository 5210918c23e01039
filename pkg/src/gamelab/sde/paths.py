"""Discrete cadlag paths and coupled samples."""

from dataclasses import dataclass, field

import numpy as np

from gamelab.exceptions import GridMismatchError, InvariantViolationError
from gamelab.model.controls import ControlPath, node_index
from gamelab.sde.driver import BrownianDriver


@dataclass(frozen=True, eq=False)
class CadlagPath:
    """Right limits X_{s_i} (values) and left limits X_{s_i-} (pre_values)."""

    times: np.ndarray
    values: np.ndarray
    pre_values: np.ndarray
    jump_flags: np.ndarray
    control: ControlPath | None = None
    gamma: float = 0.0

    def __post_init__(self):
        for arr in (self.values, self.pre_values, self.jump_flags, self.times):
            arr.setflags(write=False)

    @property
    def dt(self) -> float:
        return float(self.times[1] - self.times[0])

    @property
    def d(self) -> int:
        return self.values.shape[1]

    def check_jumps(self, atol: float = 1e-9) -> None:
        """values - pre_values must equal n * atom at flagged nodes and vanish elsewhere.

        Raises:
            InvariantViolationError: naming the first bad node
        """
        diff = self.values - self.pre_values
        quiet = ~self.jump_flags
        if np.any(diff[quiet] != 0):
            node = int(np.flatnonzero(quiet & np.any(diff != 0, axis=1))[0])
            raise InvariantViolationError(f"unflagged jump at node {node}")
        if self.control is not None:
            expected = self.control.atoms[:, None] * self.control.directions
            err = np.abs(diff - expected).max(axis=1)
            scale = 1.0 + np.abs(self.values).max(axis=1)
            bad = np.flatnonzero(err > atol * scale)
            if bad.size:
                raise InvariantViolationError(f"jump does not match control at node {bad[0]}")

    def table(self) -> tuple[list[str], list[list[float]]]:
        """CSV rows: s, x_1..x_d, pre_x_1..pre_x_d, jump_flag."""
        d = self.d
        header = (
            ["s"] + [f"x_{i + 1}" for i in range(d)] + [f"pre_x_{i + 1}" for i in range(d)]
            + ["jump_flag"]
        )
        data = np.column_stack(
            [self.times, self.values, self.pre_values, self.jump_flags.astype(float)]
        )
        rows = data.tolist()
        for row in rows:
            row[-1] = int(row[-1])
        return header, rows


@dataclass(frozen=True, eq=False)
class CoupledSample:
    """Base path and gamma-perturbed companions on one driver and one control."""

    base: CadlagPath
    perturbed: dict[float, CadlagPath] = field(default_factory=dict)
    driver_seed: int = 0
    driver: BrownianDriver | None = None


def _check_grids(a: CadlagPath, b: CadlagPath) -> None:
    if a.times.shape != b.times.shape or not np.array_equal(a.times, b.times):
        raise GridMismatchError("paths live on different time grids")
    if a.values.shape != b.values.shape:
        raise GridMismatchError("paths have different state dimensions")


def sup_distance(a: CadlagPath, b: CadlagPath, p: float = 1.0) -> float:
    """max over nodes and over both limits of |a - b|, raised to p."""
    _check_grids(a, b)
    right = np.linalg.norm(a.values - b.values, axis=1)
    left = np.linalg.norm(a.pre_values - b.pre_values, axis=1)
    return float(max(right.max(), left.max()) ** p)


def left_limit(path: CadlagPath, s: float) -> np.ndarray:
    """X_{s-} at grid time s.

    Raises:
        ConfigurationError: s off the grid
    """
    return np.array(path.pre_values[node_index(path.times, s)])
