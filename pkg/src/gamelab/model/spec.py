"""Game data: coefficients, payoffs, discount, horizon and assumption profile.

A GameSpec is stored as a JSON document with the keys
dims, horizon, discount, drift, diffusion, payoffs, profile (and an
optional name). Coefficients are built from the parametric families in
gamelab.model.fields.
"""

import json
import logging
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Any

import numpy as np

from gamelab.exceptions import InvariantViolationError, SchemaError
from gamelab.model.fields import (
    ConstantCost,
    ZeroDiffusion,
    ZeroDrift,
    ZeroPayoff,
    build_field,
)

logger = logging.getLogger(__name__)

VARIANTS = ("A22_sublinear", "A51_quadratic", "A51_lipschitz_h")
SIGMA_STRUCTURES = ("separable_ia", "sqrt_growth_ib", "neither")


@dataclass(frozen=True)
class AssumptionProfile:
    """Which standing assumptions a spec claims, with their constants.

    A22_sublinear: Lipschitz b, sigma plus (g + h) <= K1 (1 + |x|^beta), beta < 1.
    A51_quadratic: smoother payoffs with h <= K5 (1 + |x|^2); needs (i.a) or (i.b).
    A51_lipschitz_h: as A51_quadratic with Lipschitz h, which drops (i.a)/(i.b).
    """

    variant: str = "A22_sublinear"
    D1: float = 1.0
    D2: float | None = None
    D3: float = 1.0
    K1: float = 1.0
    K2: float = 1.0
    K5: float | None = None
    sigma_structure: str = "separable_ia"
    beta: float = 0.5

    def __post_init__(self):
        if self.variant not in VARIANTS:
            raise SchemaError(f"unknown variant {self.variant!r}", field_path="profile.variant")
        if self.sigma_structure not in SIGMA_STRUCTURES:
            raise SchemaError(
                f"unknown sigma structure {self.sigma_structure!r}",
                field_path="profile.sigma_structure",
            )
        if self.variant == "A22_sublinear" and not (0.0 <= self.beta < 1.0):
            raise SchemaError("A22_sublinear requires 0 <= beta < 1", field_path="profile.beta")
        if self.variant == "A51_quadratic" and self.sigma_structure == "neither":
            raise SchemaError(
                "A51_quadratic requires sigma structure (i.a) or (i.b)",
                field_path="profile.sigma_structure",
            )
        if self.variant.startswith("A51") and self.K5 is None:
            raise SchemaError("A51 variants require K5", field_path="profile.K5")
        if self.sigma_structure == "sqrt_growth_ib" and self.D2 is None:
            raise SchemaError("sqrt_growth_ib requires D2", field_path="profile.D2")

    @property
    def quadratic(self) -> bool:
        return self.variant.startswith("A51")

    def class_bound(self, x: np.ndarray) -> float:
        """Bound on E[nu_{T-t}] defining the restricted control class at x."""
        size = float(np.linalg.norm(np.asarray(x, dtype=float)))
        growth = size**2 if self.quadratic else size
        return self.K2 * (1.0 + growth)

    def growth_weight(self, x: np.ndarray) -> np.ndarray:
        """Spatial weight in the value convergence rate: 1, or (1+|x|^2)^beta for A51."""
        x = np.asarray(x, dtype=float)
        if not self.quadratic:
            return np.ones(x.shape[:-1])
        return (1.0 + np.sum(x**2, axis=-1)) ** self.beta

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: dict) -> "AssumptionProfile":
        unknown = sorted(set(data) - set(cls.__dataclass_fields__))
        if unknown:
            raise SchemaError(f"unexpected keys {unknown}", field_path="profile")
        return cls(**data)


@dataclass(frozen=True)
class GameSpec:
    """Coefficients, payoffs and constants of one game."""

    d: int = 1
    d_prime: int = 1
    T: float = 1.0
    r: float = 0.0
    b: Any = field(default_factory=ZeroDrift)
    sigma: Any = field(default_factory=ZeroDiffusion)
    f: Any = field(default_factory=ConstantCost)
    g: Any = field(default_factory=ZeroPayoff)
    h: Any = field(default_factory=ZeroPayoff)
    profile: AssumptionProfile = field(default_factory=AssumptionProfile)
    name: str = ""

    def __post_init__(self):
        if self.d < 1 or self.d > 8:
            raise SchemaError("state dimension must be in 1..8", field_path="dims.d")
        if self.d_prime < 1:
            raise SchemaError("noise dimension must be positive", field_path="dims.d_prime")
        if self.T <= 0:
            raise SchemaError("horizon must be positive", field_path="horizon")
        if self.r < 0:
            raise SchemaError("discount must be nonnegative", field_path="discount")
        self.check_invariants()

    def check_invariants(self, n_time: int = 101, half_width: float = 4.0) -> None:
        """Sampled checks: f > 0 and non-increasing, g and h nonnegative.

        Raises:
            InvariantViolationError: with the first offending sample
        """
        ts = np.linspace(0.0, self.T, n_time)
        fs = np.asarray(self.f(ts), dtype=float)
        if np.any(fs <= 0) or not np.all(np.isfinite(fs)):
            bad = int(np.argmax(~(fs > 0)))
            raise InvariantViolationError(f"f must be positive; f({ts[bad]:.6g}) = {fs[bad]:.6g}")
        if np.any(np.diff(fs) > 1e-12 * np.maximum(1.0, np.abs(fs[:-1]))):
            bad = int(np.argmax(np.diff(fs) > 0))
            raise InvariantViolationError(f"f must be non-increasing; fails after t={ts[bad]:.6g}")

        axis = np.linspace(-half_width, half_width, 41 if self.d <= 2 else 5)
        mesh = np.stack(np.meshgrid(*([axis] * self.d), indexing="ij"), axis=-1).reshape(-1, self.d)
        for t in (0.0, self.T):
            for name in ("g", "h"):
                values = np.asarray(getattr(self, name)(t, mesh), dtype=float)
                if np.any(values < 0):
                    bad = int(np.argmin(values))
                    raise InvariantViolationError(
                        f"{name} must be nonnegative; {name}({t}, {mesh[bad].tolist()}) = "
                        f"{values[bad]:.6g}"
                    )

    def a_gamma(self, x: np.ndarray, gamma: float) -> np.ndarray:
        """a_gamma(x) = sigma sigma^T (x) + gamma^2 I, shape (..., d, d)."""
        s = self.sigma(np.asarray(x, dtype=float))
        a = s @ np.swapaxes(s, -1, -2)
        return a + gamma**2 * np.eye(self.d)

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "dims": {"d": self.d, "d_prime": self.d_prime},
            "horizon": self.T,
            "discount": self.r,
            "drift": self.b.to_dict(),
            "diffusion": self.sigma.to_dict(),
            "payoffs": {"f": self.f.to_dict(), "g": self.g.to_dict(), "h": self.h.to_dict()},
            "profile": self.profile.to_dict(),
        }

    @classmethod
    def from_dict(cls, data: dict) -> "GameSpec":
        """Build from the JSON document form.

        Raises:
            SchemaError: naming the offending field path
        """
        if not isinstance(data, dict):
            raise SchemaError("GameSpec document must be an object")
        required = ("dims", "horizon", "drift", "diffusion", "payoffs")
        for key in required:
            if key not in data:
                raise SchemaError("missing required key", field_path=key)
        dims = data["dims"]
        if not isinstance(dims, dict) or "d" not in dims:
            raise SchemaError("expected {'d': int, 'd_prime': int}", field_path="dims")
        payoffs = data["payoffs"]
        if not isinstance(payoffs, dict):
            raise SchemaError("expected an object with f, g, h", field_path="payoffs")
        for key in ("f", "g"):
            if key not in payoffs:
                raise SchemaError("missing required key", field_path=f"payoffs.{key}")

        try:
            d = int(dims["d"])
            d_prime = int(dims.get("d_prime", dims["d"]))
        except (TypeError, ValueError) as e:
            raise SchemaError(f"expected integer dimensions: {e}", field_path="dims") from e
        numbers = {}
        for key, default in (("horizon", None), ("discount", 0.0)):
            try:
                numbers[key] = float(data.get(key, default))
            except (TypeError, ValueError) as e:
                raise SchemaError(f"expected a number, got {data[key]!r}", field_path=key) from e

        return cls(
            d=d,
            d_prime=d_prime,
            T=numbers["horizon"],
            r=numbers["discount"],
            b=build_field("drift", data["drift"], "drift"),
            sigma=build_field("diffusion", data["diffusion"], "diffusion"),
            f=build_field("cost", payoffs["f"], "payoffs.f"),
            g=build_field("payoff", payoffs["g"], "payoffs.g"),
            h=build_field("payoff", payoffs.get("h", {"kind": "zero"}), "payoffs.h"),
            profile=AssumptionProfile.from_dict(data.get("profile", {})),
            name=str(data.get("name", "")),
        )


def canonical_json(data: Any) -> str:
    """Sorted-key compact JSON used for hashing and byte-stable output."""
    return json.dumps(data, sort_keys=True, separators=(",", ":"))


def load_spec(path: Path) -> GameSpec:
    """Load a GameSpec JSON document.

    Raises:
        SchemaError: file missing, invalid JSON or schema violation
    """
    path = Path(path)
    if not path.exists():
        raise SchemaError(f"GameSpec not found: {path}", field_path="spec")
    try:
        data = json.loads(path.read_text())
    except json.JSONDecodeError as e:
        raise SchemaError(f"invalid JSON in {path}: {e}", field_path="spec") from e
    spec = GameSpec.from_dict(data)
    logger.debug("Loaded GameSpec %r (d=%d, T=%g)", spec.name, spec.d, spec.T)
    return spec
