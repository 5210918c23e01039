"""Grid geometry, penalty schedules and the solved value grid."""

from dataclasses import asdict, dataclass, field
from typing import Any

import numpy as np

from gamelab.exceptions import ConfigurationError, SchemaError

CONTINUE = 0
STOP = 1
GRADIENT_ACTIVE = 2
REGION_LABELS = {CONTINUE: "continue", STOP: "stop", GRADIENT_ACTIVE: "gradient_active"}


@dataclass(frozen=True)
class GridParams:
    """Uniform grid on [t0, T] x [-L, L]^d.

    n_time and n_space count intervals, so the lattice has n_time + 1 time
    nodes and n_space + 1 nodes per axis.
    """

    d: int = 1
    n_time: int = 200
    n_space: int = 400
    half_width: float = 3.0
    boundary_layer: float = 0.1
    t0: float = 0.0

    def __post_init__(self):
        if self.d not in (1, 2):
            raise ConfigurationError("grids support d = 1 or d = 2", field_path="grid.d")
        if self.n_time < 1:
            raise ConfigurationError("n_time must be positive", field_path="grid.n_time")
        if self.n_space < 4 or self.n_space % 2:
            raise ConfigurationError(
                "n_space must be an even count >= 4", field_path="grid.n_space"
            )
        if self.half_width <= 0:
            raise ConfigurationError("half_width must be positive", field_path="grid.half_width")
        if not 0.0 <= self.boundary_layer < 0.5:
            raise ConfigurationError(
                "boundary_layer must lie in [0, 0.5)", field_path="grid.boundary_layer"
            )

    @property
    def dx(self) -> float:
        return 2 * self.half_width / self.n_space

    def time_nodes(self, horizon: float) -> np.ndarray:
        if not self.t0 < horizon:
            raise ConfigurationError("grid start must lie before the horizon", field_path="grid.t0")
        return np.linspace(self.t0, horizon, self.n_time + 1)

    def axes(self) -> tuple[np.ndarray, ...]:
        axis = np.linspace(-self.half_width, self.half_width, self.n_space + 1)
        return tuple(axis.copy() for _ in range(self.d))

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: dict) -> "GridParams":
        unknown = sorted(set(data) - set(cls.__dataclass_fields__))
        if unknown:
            raise SchemaError(f"unexpected keys {unknown}", field_path="grid")
        return cls(**data)


@dataclass(frozen=True)
class PenaltySchedule:
    """Decreasing penalty weights, one (obstacle, gradient) pair per stage.

    max_outer caps the Newton iterations of each time step; newton_tol is
    the relative sup-norm update tolerance.
    """

    eps_obstacle: tuple[float, ...] = (1e-2, 1e-4, 1e-6)
    eps_gradient: tuple[float, ...] = (1e-2, 1e-4, 1e-6)
    max_outer: int = 50
    newton_tol: float = 1e-10

    def __post_init__(self):
        for name in ("eps_obstacle", "eps_gradient"):
            seq = tuple(float(v) for v in getattr(self, name))
            object.__setattr__(self, name, seq)
            if not seq:
                raise SchemaError("must be nonempty", field_path=f"schedule.{name}")
            if any(v <= 0 for v in seq):
                raise SchemaError("weights must be positive", field_path=f"schedule.{name}")
            if any(b >= a for a, b in zip(seq, seq[1:])):
                raise SchemaError("weights must decrease", field_path=f"schedule.{name}")
        if len(self.eps_obstacle) != len(self.eps_gradient):
            raise SchemaError(
                "obstacle and gradient sequences need the same number of stages",
                field_path="schedule",
            )
        if self.max_outer < 1:
            raise SchemaError("max_outer must be positive", field_path="schedule.max_outer")
        if self.newton_tol <= 0:
            raise SchemaError("newton_tol must be positive", field_path="schedule.newton_tol")

    @property
    def stages(self) -> list[tuple[float, float]]:
        return list(zip(self.eps_obstacle, self.eps_gradient))

    def to_dict(self) -> dict:
        return {
            "eps_obstacle": list(self.eps_obstacle),
            "eps_gradient": list(self.eps_gradient),
            "max_outer": self.max_outer,
            "newton_tol": self.newton_tol,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "PenaltySchedule":
        unknown = sorted(set(data) - set(cls.__dataclass_fields__))
        if unknown:
            raise SchemaError(f"unexpected keys {unknown}", field_path="schedule")
        return cls(**data)


@dataclass(eq=False)
class ValueGrid:
    """A solved discrete value function u^gamma and its diagnostics.

    Arrays are indexed (time, x_1[, x_2]); grad carries a trailing axis of
    length d with centered differences.
    """

    t_nodes: np.ndarray
    axes: tuple[np.ndarray, ...]
    u: np.ndarray
    g: np.ndarray
    f: np.ndarray
    grad: np.ndarray
    residual: np.ndarray
    regions: np.ndarray
    gamma: float
    params: GridParams
    schedule: PenaltySchedule | None = None
    summary: dict[str, Any] = field(default_factory=dict)
    stage_summaries: list[dict[str, Any]] = field(default_factory=list)

    @property
    def d(self) -> int:
        return len(self.axes)

    @property
    def shape(self) -> tuple[int, ...]:
        return tuple(a.shape[0] for a in self.axes)

    @property
    def dt(self) -> float:
        return float(self.t_nodes[1] - self.t_nodes[0])

    @property
    def spacing(self) -> tuple[float, ...]:
        return tuple(float(a[1] - a[0]) for a in self.axes)

    def points(self) -> np.ndarray:
        """All spatial nodes, shape (prod(shape), d), C order."""
        mesh = np.meshgrid(*self.axes, indexing="ij")
        return np.stack([m.reshape(-1) for m in mesh], axis=1)

    def interior_mask(self, layer: float | None = None) -> np.ndarray:
        """Spatial nodes outside the boundary layer."""
        layer = self.params.boundary_layer if layer is None else layer
        L = self.params.half_width
        mesh = np.meshgrid(*self.axes, indexing="ij")
        inside = np.ones(self.shape, dtype=bool)
        for m in mesh:
            inside &= np.abs(m) <= L * (1 - layer) + 1e-12
        return inside

    def same_geometry(self, other: "ValueGrid") -> bool:
        return (
            np.array_equal(self.t_nodes, other.t_nodes)
            and len(self.axes) == len(other.axes)
            and all(np.array_equal(a, b) for a, b in zip(self.axes, other.axes))
        )
