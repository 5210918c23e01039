"""Parametric coefficient and payoff families.

Every family is a frozen dataclass that evaluates vectorised over leading
axes: states have shape (..., d), drifts return (..., d), diffusions
(..., d, d'), payoffs (...). Families round-trip through plain dicts so a
GameSpec can be stored as JSON.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass, fields
from functools import cached_property
from typing import Any, ClassVar

import numpy as np

from gamelab.exceptions import SchemaError


def _norm(x: np.ndarray) -> np.ndarray:
    return np.sqrt(np.sum(np.asarray(x, dtype=float) ** 2, axis=-1))


class FieldFamily:
    """Mixin with the dict round-trip shared by all families."""

    kind: ClassVar[str] = ""

    def to_dict(self) -> dict:
        data = {"kind": self.kind}
        data.update(asdict(self))  # type: ignore[call-overload]
        return data


# =============================================================================
# Drift b: R^d -> R^d
# =============================================================================

@dataclass(frozen=True)
class ZeroDrift(FieldFamily):
    kind: ClassVar[str] = "zero"
    d: int = 1

    def __call__(self, x: np.ndarray) -> np.ndarray:
        return np.zeros_like(np.asarray(x, dtype=float))


@dataclass(frozen=True)
class AffineDrift(FieldFamily):
    """b(x) = A x + c."""

    kind: ClassVar[str] = "affine"
    matrix: tuple[tuple[float, ...], ...] = ((0.0,),)
    offset: tuple[float, ...] = (0.0,)

    @cached_property
    def _A(self) -> np.ndarray:
        return np.asarray(self.matrix, dtype=float)

    @cached_property
    def _c(self) -> np.ndarray:
        return np.asarray(self.offset, dtype=float)

    def __call__(self, x: np.ndarray) -> np.ndarray:
        return np.asarray(x, dtype=float) @ self._A.T + self._c


@dataclass(frozen=True)
class TabulatedDrift(FieldFamily):
    """1-d drift from a table, linear between nodes, constant outside."""

    kind: ClassVar[str] = "tabulated"
    nodes: tuple[float, ...] = (0.0, 1.0)
    values: tuple[float, ...] = (0.0, 0.0)

    def __call__(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        return np.interp(x[..., 0], self.nodes, self.values)[..., None]


# =============================================================================
# Diffusion sigma: R^d -> R^{d x d'}
# =============================================================================

@dataclass(frozen=True)
class ZeroDiffusion(FieldFamily):
    kind: ClassVar[str] = "zero"
    d: int = 1
    d_prime: int = 1

    def __call__(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        return np.zeros(x.shape[:-1] + (self.d, self.d_prime))


@dataclass(frozen=True)
class ConstantDiffusion(FieldFamily):
    kind: ClassVar[str] = "constant"
    matrix: tuple[tuple[float, ...], ...] = ((0.0,),)

    @cached_property
    def _S(self) -> np.ndarray:
        return np.asarray(self.matrix, dtype=float)

    def __call__(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        return np.broadcast_to(self._S, x.shape[:-1] + self._S.shape).copy()


@dataclass(frozen=True)
class SeparableSqrtDiffusion(FieldFamily):
    """sigma_ii(x) = scale * sqrt(shift + |x_i|), zero off the diagonal (d' = d)."""

    kind: ClassVar[str] = "separable_sqrt"
    scale: float = 1.0
    shift: float = 1.0

    def __call__(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        diag = self.scale * np.sqrt(self.shift + np.abs(x))
        out = np.zeros(x.shape + (x.shape[-1],))
        idx = np.arange(x.shape[-1])
        out[..., idx, idx] = diag
        return out


@dataclass(frozen=True)
class SqrtGrowthDiffusion(FieldFamily):
    """sigma(x) = scale * (1 + |x|)^(1/2) * M, with M the d x d' loading matrix."""

    kind: ClassVar[str] = "sqrt_growth"
    scale: float = 1.0
    loading: tuple[tuple[float, ...], ...] = ((1.0,),)

    @cached_property
    def _M(self) -> np.ndarray:
        return np.asarray(self.loading, dtype=float)

    def __call__(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        level = self.scale * np.sqrt(1.0 + _norm(x))
        return level[..., None, None] * self._M


@dataclass(frozen=True)
class DiagonalLinearDiffusion(FieldFamily):
    """sigma_ii(x) = slope * x_i + offset (d' = d); separable by construction."""

    kind: ClassVar[str] = "diagonal_linear"
    slope: float = 0.0
    offset: float = 0.0

    def __call__(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        out = np.zeros(x.shape + (x.shape[-1],))
        idx = np.arange(x.shape[-1])
        out[..., idx, idx] = self.slope * x + self.offset
        return out


@dataclass(frozen=True)
class TabulatedDiffusion(FieldFamily):
    """1-d diffusion (d = d' = 1) from a table."""

    kind: ClassVar[str] = "tabulated"
    nodes: tuple[float, ...] = (0.0, 1.0)
    values: tuple[float, ...] = (0.0, 0.0)

    def __call__(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        return np.interp(x[..., 0], self.nodes, self.values)[..., None, None]


# =============================================================================
# Control cost f: [0, T] -> (0, inf)
# =============================================================================

@dataclass(frozen=True)
class ConstantCost(FieldFamily):
    kind: ClassVar[str] = "constant"
    value: float = 1.0

    def __call__(self, t: np.ndarray | float) -> np.ndarray:
        return np.full(np.shape(t), float(self.value))


@dataclass(frozen=True)
class ExpDecayCost(FieldFamily):
    """f(t) = value * exp(-rate * t), non-increasing for rate >= 0."""

    kind: ClassVar[str] = "exp_decay"
    value: float = 1.0
    rate: float = 0.0

    def __call__(self, t: np.ndarray | float) -> np.ndarray:
        return self.value * np.exp(-self.rate * np.asarray(t, dtype=float))


@dataclass(frozen=True)
class TabulatedCost(FieldFamily):
    """f(t) interpolated from a table; values must be non-increasing."""

    kind: ClassVar[str] = "tabulated"
    nodes: tuple[float, ...] = (0.0, 1.0)
    values: tuple[float, ...] = (1.0, 1.0)

    def __call__(self, t: np.ndarray | float) -> np.ndarray:
        return np.interp(np.asarray(t, dtype=float), self.nodes, self.values)


# =============================================================================
# Payoffs g, h: [0, T] x R^d -> [0, inf)
# =============================================================================

@dataclass(frozen=True)
class ZeroPayoff(FieldFamily):
    kind: ClassVar[str] = "zero"

    def __call__(self, t: Any, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        return np.zeros(np.broadcast_shapes(np.shape(t), x.shape[:-1]))


@dataclass(frozen=True)
class ConstantPayoff(FieldFamily):
    kind: ClassVar[str] = "constant"
    value: float = 0.0

    def __call__(self, t: Any, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        return np.full(np.broadcast_shapes(np.shape(t), x.shape[:-1]), float(self.value))


@dataclass(frozen=True)
class PutPayoff(FieldFamily):
    """scale * (strike - x_k)^+ on coordinate k."""

    kind: ClassVar[str] = "put"
    strike: float = 1.0
    scale: float = 1.0
    coord: int = 0

    def __call__(self, t: Any, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        value = self.scale * np.maximum(self.strike - x[..., self.coord], 0.0)
        return np.broadcast_to(value, np.broadcast_shapes(np.shape(t), value.shape)).copy()


@dataclass(frozen=True)
class CallPayoff(FieldFamily):
    """scale * (x_k - strike)^+ on coordinate k."""

    kind: ClassVar[str] = "call"
    strike: float = 0.0
    scale: float = 1.0
    coord: int = 0

    def __call__(self, t: Any, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        value = self.scale * np.maximum(x[..., self.coord] - self.strike, 0.0)
        return np.broadcast_to(value, np.broadcast_shapes(np.shape(t), value.shape)).copy()


@dataclass(frozen=True)
class AbsPayoff(FieldFamily):
    """min(scale * |x - center|, cap); cap=None means uncapped."""

    kind: ClassVar[str] = "abs"
    scale: float = 1.0
    cap: float | None = None
    center: float = 0.0

    def __call__(self, t: Any, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        value = self.scale * _norm(x - self.center)
        if self.cap is not None:
            value = np.minimum(value, self.cap)
        return np.broadcast_to(value, np.broadcast_shapes(np.shape(t), value.shape)).copy()


@dataclass(frozen=True)
class SmoothAbsPayoff(FieldFamily):
    """scale * (sqrt(|x|^2 + eps^2) - eps): smooth, gradient norm tends to scale."""

    kind: ClassVar[str] = "smooth_abs"
    scale: float = 1.0
    eps: float = 0.1

    def __call__(self, t: Any, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        value = self.scale * (np.sqrt(_norm(x) ** 2 + self.eps**2) - self.eps)
        return np.broadcast_to(value, np.broadcast_shapes(np.shape(t), value.shape)).copy()


@dataclass(frozen=True)
class TentPayoff(FieldFamily):
    """height * (1 - |x - center| / width)^+."""

    kind: ClassVar[str] = "tent"
    height: float = 1.0
    width: float = 1.0
    center: float = 0.0

    def __call__(self, t: Any, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        value = self.height * np.maximum(1.0 - _norm(x - self.center) / self.width, 0.0)
        return np.broadcast_to(value, np.broadcast_shapes(np.shape(t), value.shape)).copy()


@dataclass(frozen=True)
class PowerPayoff(FieldFamily):
    """scale * |x|^exponent (exponent < 1: sublinear, 2: quadratic growth)."""

    kind: ClassVar[str] = "power"
    scale: float = 1.0
    exponent: float = 0.5

    def __call__(self, t: Any, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        value = self.scale * _norm(x) ** self.exponent
        return np.broadcast_to(value, np.broadcast_shapes(np.shape(t), value.shape)).copy()


@dataclass(frozen=True)
class TabulatedPayoff(FieldFamily):
    """1-d time-independent payoff from a table."""

    kind: ClassVar[str] = "tabulated"
    nodes: tuple[float, ...] = (0.0, 1.0)
    values: tuple[float, ...] = (0.0, 0.0)

    def __call__(self, t: Any, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        value = np.interp(x[..., 0], self.nodes, self.values)
        return np.broadcast_to(value, np.broadcast_shapes(np.shape(t), value.shape)).copy()


# =============================================================================
# Registry
# =============================================================================

DRIFTS: dict[str, type] = {
    cls.kind: cls for cls in (ZeroDrift, AffineDrift, TabulatedDrift)
}
DIFFUSIONS: dict[str, type] = {
    cls.kind: cls
    for cls in (
        ZeroDiffusion, ConstantDiffusion, SeparableSqrtDiffusion,
        SqrtGrowthDiffusion, DiagonalLinearDiffusion, TabulatedDiffusion,
    )
}
COSTS: dict[str, type] = {
    cls.kind: cls for cls in (ConstantCost, ExpDecayCost, TabulatedCost)
}
PAYOFFS: dict[str, type] = {
    cls.kind: cls
    for cls in (
        ZeroPayoff, ConstantPayoff, PutPayoff, CallPayoff, AbsPayoff,
        SmoothAbsPayoff, TentPayoff, PowerPayoff, TabulatedPayoff,
    )
}

_REGISTRIES = {
    "drift": DRIFTS,
    "diffusion": DIFFUSIONS,
    "cost": COSTS,
    "payoff": PAYOFFS,
}


def _freeze(value: Any) -> Any:
    """Lists from JSON become tuples so families stay hashable."""
    if isinstance(value, list):
        return tuple(_freeze(v) for v in value)
    return value


def build_field(role: str, data: dict, field_path: str = "") -> FieldFamily:
    """Build a family instance from its dict form.

    Raises:
        SchemaError: unknown kind or unexpected parameters, naming field_path
    """
    registry = _REGISTRIES[role]
    path = field_path or role
    if not isinstance(data, dict) or "kind" not in data:
        raise SchemaError("expected an object with a 'kind' key", field_path=path)
    kind = data["kind"]
    if kind not in registry:
        raise SchemaError(
            f"unknown {role} kind {kind!r}; expected one of {sorted(registry)}",
            field_path=f"{path}.kind",
        )
    cls = registry[kind]
    allowed = {f.name for f in fields(cls)}
    params = {k: _freeze(v) for k, v in data.items() if k != "kind"}
    unknown = sorted(set(params) - allowed)
    if unknown:
        raise SchemaError(f"unexpected parameters {unknown} for kind {kind!r}", field_path=path)
    try:
        return cls(**params)
    except (TypeError, ValueError) as e:
        raise SchemaError(str(e), field_path=path) from e

