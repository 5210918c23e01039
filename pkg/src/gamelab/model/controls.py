"""Singular control pairs (n, nu) on a uniform time grid.

A ControlPath stores, for grid nodes s_0..s_N:
    directions  (N+1, d) unit vectors n_{s_i}
    density     (N,)     rate of the absolutely continuous part on [s_i, s_{i+1})
    atoms       (N+1,)   jump sizes of nu at s_i (atom 0 acts before the first step)

ControlFamily describes the parametric families used by experiments. Open-loop
families (zero, constant_density, jump_at) expand to a ControlPath directly;
feedback families (reflect_at, threshold_push) decide their atoms from the
left limit X_{s-} while the path is simulated.
"""

import logging
from dataclasses import dataclass, field
from typing import Any

import numpy as np

from gamelab.exceptions import (
    ConfigurationError,
    ControlClassError,
    InvariantViolationError,
    SchemaError,
)

logger = logging.getLogger(__name__)

UNIT_TOL = 1e-12

OPEN_LOOP_KINDS = ("zero", "constant_density", "jump_at")
FEEDBACK_KINDS = ("reflect_at", "threshold_push")


def _unit(direction: Any, d: int | None = None) -> np.ndarray:
    n = np.asarray(direction, dtype=float).reshape(-1)
    if d is not None and n.shape[0] != d:
        raise ConfigurationError(f"direction has dimension {n.shape[0]}, expected {d}")
    if abs(np.linalg.norm(n) - 1.0) > UNIT_TOL:
        raise InvariantViolationError(f"direction {n.tolist()} is not a unit vector")
    return n


@dataclass(frozen=True, eq=False)
class ControlPath:
    """Realised control pair on a time grid."""

    times: np.ndarray
    directions: np.ndarray
    density: np.ndarray
    atoms: np.ndarray
    tagged_opt: bool = False

    def __post_init__(self):
        n_nodes = self.times.shape[0]
        if self.directions.shape[0] != n_nodes or self.atoms.shape != (n_nodes,):
            raise ConfigurationError("control arrays do not match the time grid")
        if self.density.shape != (n_nodes - 1,):
            raise ConfigurationError("density must have one entry per grid interval")
        norms = np.linalg.norm(self.directions, axis=1)
        bad = np.flatnonzero(np.abs(norms - 1.0) > UNIT_TOL)
        if bad.size:
            raise InvariantViolationError(f"non-unit direction at node {int(bad[0])}")
        if np.any(self.atoms < 0):
            raise InvariantViolationError(
                f"negative atom at node {int(np.flatnonzero(self.atoms < 0)[0])}"
            )
        if np.any(self.density < 0):
            raise InvariantViolationError("negative control density")

    @property
    def d(self) -> int:
        return self.directions.shape[1]

    @property
    def dt(self) -> float:
        return float(self.times[1] - self.times[0])

    @property
    def total(self) -> np.ndarray:
        """Running nu_{s_i}, including the time-0 atom."""
        increments = self.atoms.copy()
        increments[1:] += self.density * self.dt
        return np.cumsum(increments)

    @property
    def is_continuous(self) -> bool:
        return not np.any(self.atoms > 0)

    def increments(self) -> np.ndarray:
        """State displacement n * dnu per node, shape (N+1, d)."""
        step = self.atoms.copy()
        step[1:] += self.density * self.dt
        return step[:, None] * self.directions

    @classmethod
    def zero(cls, times: np.ndarray, d: int) -> "ControlPath":
        directions = np.zeros((times.shape[0], d))
        directions[:, 0] = 1.0
        return cls(times, directions, np.zeros(times.shape[0] - 1), np.zeros(times.shape[0]))


@dataclass(frozen=True)
class ControlFamily:
    """A parametric control family.

    kind is one of zero, constant_density(rate, direction), reflect_at(barrier,
    direction), jump_at(time, size, direction), threshold_push(level, size,
    direction).
    """

    kind: str = "zero"
    direction: tuple[float, ...] = (1.0,)
    rate: float = 0.0
    barrier: float = 0.0
    time: float = 0.0
    size: float = 0.0
    level: float = 0.0
    tagged_opt: bool = True
    label: str = field(default="", compare=False)

    def __post_init__(self):
        if self.kind not in OPEN_LOOP_KINDS + FEEDBACK_KINDS:
            raise SchemaError(
                f"unknown control kind {self.kind!r}; expected one of "
                f"{sorted(OPEN_LOOP_KINDS + FEEDBACK_KINDS)}",
                field_path="control.kind",
            )
        _unit(self.direction)
        if self.size < 0:
            raise InvariantViolationError(f"negative jump size {self.size}")
        if self.rate < 0:
            raise InvariantViolationError(f"negative density rate {self.rate}")

    @property
    def is_feedback(self) -> bool:
        return self.kind in FEEDBACK_KINDS

    @property
    def name(self) -> str:
        if self.label:
            return self.label
        params = {
            "zero": "",
            "constant_density": f"rate={self.rate:g}",
            "reflect_at": f"barrier={self.barrier:g}",
            "jump_at": f"time={self.time:g},size={self.size:g}",
            "threshold_push": f"level={self.level:g},size={self.size:g}",
        }[self.kind]
        return f"{self.kind}({params})" if params else self.kind

    @property
    def driven_coord(self) -> int:
        return int(np.argmax(np.abs(self.direction)))

    def unit_direction(self, d: int) -> np.ndarray:
        return _unit(self.direction, d)

    # -- open loop -----------------------------------------------------------

    def open_loop(self, times: np.ndarray, d: int) -> ControlPath:
        """Expand an open-loop family on the grid."""
        if self.is_feedback:
            raise ConfigurationError(f"{self.kind} is a feedback family; it needs a path")
        if self.kind == "zero":
            base = ControlPath.zero(times, d)
            return ControlPath(
                times, base.directions, base.density, base.atoms, tagged_opt=self.tagged_opt
            )
        n_nodes = times.shape[0]
        n = self.unit_direction(d)
        directions = np.broadcast_to(n, (n_nodes, d)).copy()
        density = np.zeros(n_nodes - 1)
        atoms = np.zeros(n_nodes)
        if self.kind == "constant_density":
            density[:] = self.rate
        elif self.kind == "jump_at":
            atoms[node_index(times, self.time)] = self.size
        return ControlPath(times, directions, density, atoms, tagged_opt=self.tagged_opt)

    # -- feedback ------------------------------------------------------------

    def initial_state(self, n_paths: int) -> np.ndarray:
        """Per-path memory: whether a threshold push already fired."""
        return np.zeros(n_paths, dtype=bool)

    def feedback_atoms(self, x_pre: np.ndarray, fired: np.ndarray) -> np.ndarray:
        """Atoms chosen at one node from the left limits x_pre, shape (n_paths, d).

        fired is updated in place for threshold_push.
        """
        i = self.driven_coord
        n_i = self.direction[i]
        x_i = x_pre[:, i]
        if self.kind == "reflect_at":
            return np.maximum(0.0, (self.barrier - x_i) / n_i)
        hit = (n_i * (x_i - self.level) <= 0.0) & ~fired
        fired |= hit
        return np.where(hit, self.size, 0.0)

    def to_dict(self) -> dict:
        data: dict[str, Any] = {"kind": self.kind, "direction": list(self.direction)}
        if self.kind == "constant_density":
            data["rate"] = self.rate
        elif self.kind == "reflect_at":
            data["barrier"] = self.barrier
        elif self.kind == "jump_at":
            data.update(time=self.time, size=self.size)
        elif self.kind == "threshold_push":
            data.update(level=self.level, size=self.size)
        if self.label:
            data["label"] = self.label
        return data

    @classmethod
    def from_dict(cls, data: dict, field_path: str = "control") -> "ControlFamily":
        if not isinstance(data, dict) or "kind" not in data:
            raise SchemaError("expected an object with a 'kind' key", field_path=field_path)
        allowed = set(cls.__dataclass_fields__)
        unknown = sorted(set(data) - allowed)
        if unknown:
            raise SchemaError(f"unexpected keys {unknown}", field_path=field_path)
        params = dict(data)
        if "direction" in params:
            params["direction"] = tuple(float(v) for v in params["direction"])
        if params["kind"] not in OPEN_LOOP_KINDS + FEEDBACK_KINDS:
            raise SchemaError(
                f"unknown control kind {params['kind']!r}", field_path=f"{field_path}.kind"
            )
        try:
            return cls(**params)
        except (InvariantViolationError, TypeError) as e:
            raise SchemaError(str(e), field_path=field_path) from e


def node_index(times: np.ndarray, s: float) -> int:
    """Index of grid time s.

    Raises:
        ConfigurationError: if s is not a grid node
    """
    k = int(np.rint((s - times[0]) / (times[1] - times[0]))) if times.shape[0] > 1 else 0
    if k < 0 or k >= times.shape[0] or abs(times[k] - s) > 1e-9 * max(1.0, abs(s)):
        raise ConfigurationError(f"time {s!r} is not on the grid")
    return k


def make_control(
    family: ControlFamily,
    times: np.ndarray,
    d: int = 1,
    path: Any = None,
) -> ControlPath:
    """Build a ControlPath for a family on a grid.

    Feedback families need the uncontrolled path (array (N+1, d) or a
    CadlagPath); the recursion assumes dynamics that do not depend on the
    state, so the controlled left limit is the uncontrolled state shifted by
    the control already exerted.
    """
    if not family.is_feedback:
        return family.open_loop(times, d)
    if path is None:
        raise ConfigurationError(f"{family.kind} needs a recorded path")

    states = np.asarray(getattr(path, "values", path), dtype=float)
    if states.ndim == 1:
        states = states[:, None]
    if states.shape[0] != times.shape[0]:
        raise ConfigurationError("recorded path does not match the time grid")
    d = states.shape[1]
    n = family.unit_direction(d)
    atoms = np.zeros(times.shape[0])
    fired = family.initial_state(1)
    shift = np.zeros(d)
    for k in range(times.shape[0]):
        x_pre = (states[k] + shift)[None, :]
        atom = float(family.feedback_atoms(x_pre, fired)[0])
        atoms[k] = atom
        shift = shift + atom * n
    directions = np.broadcast_to(n, (times.shape[0], d)).copy()
    return ControlPath(
        times, directions, np.zeros(times.shape[0] - 1), atoms, tagged_opt=family.tagged_opt
    )


def check_class_bound(
    horizon_totals: np.ndarray,
    x: np.ndarray,
    profile: Any,
    label: str = "control",
) -> float:
    """Sampled mean of nu_{T-t} against the restricted class bound.

    Raises:
        ControlClassError: when the mean exceeds the profile bound
    """
    observed = float(np.mean(horizon_totals))
    bound = profile.class_bound(x)
    if observed > bound:
        raise ControlClassError(
            f"{label}: E[nu] = {observed:.6g} exceeds class bound {bound:.6g}",
            observed=observed,
            bound=bound,
        )
    logger.debug("%s: E[nu] = %.4g within class bound %.4g", label, observed, bound)
    return observed
