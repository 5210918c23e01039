"""Experiment configuration: schema walk, dataclass sections and hashing.

Configs are YAML or JSON documents (yaml.safe_load reads both). Every
schema violation raises SchemaError naming the field path, e.g.
``simulation.gammas[2]``.

Precedence: CLI flag > GAMELAB_THREADS > config file > dataclass default.
"""

import hashlib
import logging
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Any

import yaml

from gamelab.exceptions import SchemaError
from gamelab.lab.sweeps import REFERENCES
from gamelab.model.controls import ControlFamily
from gamelab.model.spec import GameSpec, canonical_json, load_spec
from gamelab.vi.grid import GridParams, PenaltySchedule

logger = logging.getLogger(__name__)

NUMBER = "number"
INTEGER = "integer"
STRING = "string"
BOOLEAN = "boolean"
NUMBERS = "numbers"
OBJECT = "object"
OBJECTS = "objects"
POINT = "point"


# =============================================================================
# Sections
# =============================================================================

@dataclass
class SimulationSection:
    n_steps: int = 1000
    n_paths: int = 10_000
    gammas: list[float] = field(default_factory=list)
    p: list[float] = field(default_factory=lambda: [1.0])
    control: dict = field(default_factory=lambda: {"kind": "zero"})
    block_size: int | None = None

    def control_family(self) -> ControlFamily:
        return ControlFamily.from_dict(self.control, "simulation.control")


@dataclass
class GridSection:
    n_time: int = 200
    n_space: int = 400
    half_width: float = 3.0
    boundary_layer: float = 0.1

    def params(self, d: int, t0: float = 0.0) -> GridParams:
        return GridParams(d, self.n_time, self.n_space, self.half_width, self.boundary_layer, t0)


@dataclass
class TolerancesSection:
    contact_tol: float | None = None
    grad_tol: float = 0.02
    residual_tol: float = 1e-2
    oracle_rel_tol: float = 0.01
    min_r2: float = 0.95


@dataclass
class MollifySection:
    js: list[int] = field(default_factory=lambda: [2, 4, 8, 16])
    ks: list[float] = field(default_factory=lambda: [16.0])
    ms: list[float] = field(default_factory=lambda: [3.0])
    grad_tol: float = 1e-3
    error_factor: float = 0.6
    solve: bool = False
    gamma: float = 0.25


@dataclass
class StudySection:
    controls: list[dict] = field(default_factory=list)
    jump_control: dict | None = None
    probe_points: list[float] = field(default_factory=list)
    reference: str = "cauchy"
    budget: float = 0.0
    last: int = 3
    slack_steps: int = 2
    max_fraction: float = 0.05
    min_fraction: float = 0.01
    min_controls: int = 10
    oracle_steps: int = 2000

    def __post_init__(self):
        if self.reference not in REFERENCES:
            raise SchemaError(
                f"reference must be one of {REFERENCES}, got {self.reference!r}",
                field_path="study.reference",
            )

    def control_families(self) -> list[ControlFamily]:
        return [
            ControlFamily.from_dict(c, f"study.controls[{i}]") for i, c in enumerate(self.controls)
        ]


SECTIONS = {
    "simulation": SimulationSection,
    "grid": GridSection,
    "tolerances": TolerancesSection,
    "mollify": MollifySection,
    "study": StudySection,
}

SCHEMA: dict[str, Any] = {
    "spec": STRING,
    "seed": INTEGER,
    "output_dir": STRING,
    "threads": INTEGER,
    "x0": POINT,
    "t0": NUMBER,
    "simulation": {
        "n_steps": INTEGER, "n_paths": INTEGER, "gammas": NUMBERS, "p": NUMBERS,
        "control": OBJECT, "block_size": INTEGER,
    },
    "grid": {"n_time": INTEGER, "n_space": INTEGER, "half_width": NUMBER, "boundary_layer": NUMBER},
    "schedule": {
        "eps_obstacle": NUMBERS, "eps_gradient": NUMBERS, "max_outer": INTEGER,
        "newton_tol": NUMBER,
    },
    "tolerances": {
        "contact_tol": NUMBER, "grad_tol": NUMBER, "residual_tol": NUMBER,
        "oracle_rel_tol": NUMBER, "min_r2": NUMBER,
    },
    "mollify": {
        "js": NUMBERS, "ks": NUMBERS, "ms": NUMBERS, "grad_tol": NUMBER,
        "error_factor": NUMBER, "solve": BOOLEAN, "gamma": NUMBER,
    },
    "study": {
        "controls": OBJECTS, "jump_control": OBJECT, "probe_points": NUMBERS,
        "reference": STRING, "budget": NUMBER, "last": INTEGER, "slack_steps": INTEGER,
        "max_fraction": NUMBER, "min_fraction": NUMBER, "min_controls": INTEGER,
        "oracle_steps": INTEGER,
    },
}


def _is_number(value: Any) -> bool:
    return isinstance(value, (int, float)) and not isinstance(value, bool)


def _check_value(kind: str, value: Any, path: str) -> None:
    if value is None and kind in (OBJECT, INTEGER):
        return
    if kind == NUMBER and not _is_number(value):
        raise SchemaError(f"expected a number, got {value!r}", field_path=path)
    if kind == INTEGER and not (isinstance(value, int) and not isinstance(value, bool)):
        raise SchemaError(f"expected an integer, got {value!r}", field_path=path)
    if kind == STRING and not isinstance(value, str):
        raise SchemaError(f"expected a string, got {value!r}", field_path=path)
    if kind == BOOLEAN and not isinstance(value, bool):
        raise SchemaError(f"expected true or false, got {value!r}", field_path=path)
    if kind == OBJECT and not isinstance(value, dict):
        raise SchemaError("expected an object", field_path=path)
    if kind in (NUMBERS, OBJECTS):
        if not isinstance(value, list):
            raise SchemaError("expected a list", field_path=path)
        inner = NUMBER if kind == NUMBERS else OBJECT
        for i, item in enumerate(value):
            _check_value(inner, item, f"{path}[{i}]")
    if kind == POINT:
        if isinstance(value, list):
            for i, item in enumerate(value):
                _check_value(NUMBER, item, f"{path}[{i}]")
        elif not _is_number(value):
            raise SchemaError(
                f"expected a number or a list of numbers, got {value!r}", field_path=path
            )


def validate_document(data: Any) -> None:
    """Walk data against SCHEMA.

    Raises:
        SchemaError: unknown key, wrong type or missing seed/spec, with the field path
    """
    if not isinstance(data, dict):
        raise SchemaError("experiment config must be a mapping")
    for key, value in data.items():
        if key not in SCHEMA:
            raise SchemaError(f"unknown key {key!r}", field_path=key)
        expected = SCHEMA[key]
        if isinstance(expected, dict):
            if not isinstance(value, dict):
                raise SchemaError("expected an object", field_path=key)
            for sub, sub_value in value.items():
                if sub not in expected:
                    raise SchemaError(f"unknown key {sub!r}", field_path=f"{key}.{sub}")
                _check_value(expected[sub], sub_value, f"{key}.{sub}")
        else:
            _check_value(expected, value, key)
    for required in ("spec", "seed"):
        if required not in data:
            raise SchemaError("required key is missing", field_path=required)


# =============================================================================
# ExperimentConfig
# =============================================================================

@dataclass
class ExperimentConfig:
    spec: str
    seed: int
    output_dir: str = "out"
    threads: int | None = None
    x0: list[float] = field(default_factory=lambda: [0.0])
    t0: float = 0.0
    simulation: SimulationSection = field(default_factory=SimulationSection)
    grid: GridSection = field(default_factory=GridSection)
    schedule: PenaltySchedule = field(default_factory=PenaltySchedule)
    tolerances: TolerancesSection = field(default_factory=TolerancesSection)
    mollify: MollifySection = field(default_factory=MollifySection)
    study: StudySection = field(default_factory=StudySection)
    source: Path | None = field(default=None, compare=False)

    @property
    def spec_path(self) -> Path:
        path = Path(self.spec)
        if not path.is_absolute() and self.source is not None:
            path = self.source.parent / path
        return path

    def grid_params(self, d: int) -> GridParams:
        return self.grid.params(d, self.t0)

    def to_dict(self) -> dict:
        """Resolved config without output location and thread count."""
        return {
            "spec": self.spec,
            "seed": self.seed,
            "x0": list(self.x0),
            "t0": self.t0,
            "simulation": asdict(self.simulation),
            "grid": asdict(self.grid),
            "schedule": self.schedule.to_dict(),
            "tolerances": asdict(self.tolerances),
            "mollify": asdict(self.mollify),
            "study": asdict(self.study),
        }

    @classmethod
    def from_dict(cls, data: dict, source: Path | None = None) -> "ExperimentConfig":
        validate_document(data)
        kwargs: dict[str, Any] = {
            k: data[k] for k in ("spec", "seed", "output_dir", "threads", "t0") if k in data
        }
        if "x0" in data:
            x0 = data["x0"]
            kwargs["x0"] = [float(v) for v in x0] if isinstance(x0, list) else [float(x0)]
        for name, section in SECTIONS.items():
            if name in data:
                try:
                    kwargs[name] = section(**data[name])
                except TypeError as e:
                    raise SchemaError(str(e), field_path=name) from e
        if "schedule" in data:
            kwargs["schedule"] = PenaltySchedule.from_dict(data["schedule"])
        return cls(source=source, **kwargs)


def load_config(
    path: Path,
    seed: int | None = None,
    output_dir: str | None = None,
    threads: int | None = None,
) -> tuple[ExperimentConfig, GameSpec]:
    """Read an experiment config and the GameSpec it references.

    Raises:
        SchemaError: unreadable file, schema violation or missing spec file
    """
    path = Path(path)
    if not path.exists():
        raise SchemaError(f"config not found: {path}", field_path="config")
    try:
        data = yaml.safe_load(path.read_text())
    except yaml.YAMLError as e:
        raise SchemaError(f"cannot parse {path}: {e}", field_path="config") from e
    config = ExperimentConfig.from_dict(data, source=path)
    if seed is not None:
        config.seed = seed
    if output_dir is not None:
        config.output_dir = output_dir
    if threads is not None:
        config.threads = threads
    spec = load_spec(config.spec_path)
    if len(config.x0) not in (1, spec.d):
        raise SchemaError(f"x0 needs 1 or {spec.d} entries", field_path="x0")
    if len(config.x0) == 1 and spec.d > 1:
        config.x0 = config.x0 * spec.d
    logger.debug("Loaded config %s (seed=%d, spec=%s)", path, config.seed, config.spec_path)
    return config, spec


def config_hash(config: ExperimentConfig, spec: GameSpec) -> str:
    """First 16 hex chars of sha256 over the canonical config and spec documents."""
    payload = canonical_json(config.to_dict()) + canonical_json(spec.to_dict())
    return hashlib.sha256(payload.encode()).hexdigest()[:16]
