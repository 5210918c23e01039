"""The stopper's hitting-time rules on discrete paths.

tau*   first node where value - g <= tol at the right limit X_s
sigma* first node where value - g <= tol at the left limit X_{s-}
theta* = min(tau*, sigma*)

A missed contact falls back to the horizon and is flagged. An unset tol
resolves to the value field's default_tol(), or 0 for plain callables.
"""

import logging
from dataclasses import dataclass
from typing import Any

import numpy as np

from gamelab.exceptions import ConfigurationError, DominanceViolationError
from gamelab.model.controls import ControlPath, node_index
from gamelab.model.payoff import payoff_at_stops
from gamelab.sde.engine import MomentEstimate, mc_estimate
from gamelab.sde.paths import CadlagPath

logger = logging.getLogger(__name__)

RULE_KINDS = ("tau_star", "sigma_star", "theta_star", "fixed", "horizon")


@dataclass(frozen=True, eq=False)
class StopOutcome:
    node: np.ndarray
    time: np.ndarray
    horizon_fallback: np.ndarray
    extrapolated: int = 0


def resolve_tol(value, tol: float | None) -> float:
    """tol, else the field's own default_tol(), else 0."""
    if tol is not None:
        return float(tol)
    default = getattr(value, "default_tol", None)
    return float(default()) if callable(default) else 0.0


def locate_stop(
    value, g, times: np.ndarray, states: np.ndarray, t: float, tol: float | None = None
) -> StopOutcome:
    """First contact node of each path in states (n, N+1, d) or (N+1, d).

    Raises:
        DominanceViolationError: value < g - 10 tol at some visited node
    """
    tol = resolve_tol(value, tol)
    if tol < 0:
        raise ConfigurationError("contact tolerance must be nonnegative")
    states = np.asarray(states, dtype=float)
    single = states.ndim == 2
    if single:
        states = states[None]
    abs_times = t + times
    before = getattr(value, "extrapolations", 0)
    gap = np.asarray(value(abs_times, states), dtype=float) - np.asarray(
        g(abs_times, states), dtype=float
    )
    extrapolated = getattr(value, "extrapolations", 0) - before

    worst = float(gap.min())
    if worst < -10.0 * tol:
        row, node = np.unravel_index(int(np.argmin(gap)), gap.shape)
        raise DominanceViolationError(
            f"value falls below the obstacle by {-worst:.3g} at s={times[node]:.6g}",
            node=int(node),
            gap=worst,
        )
    hit = gap <= tol
    found = hit.any(axis=1)
    node = np.where(found, np.argmax(hit, axis=1), times.shape[0] - 1)
    fallback = ~found
    if np.any(fallback):
        logger.debug("%d of %d paths missed contact; horizon fallback", fallback.sum(), len(node))
    return StopOutcome(node, times[node], fallback, int(extrapolated))


def _first_stop(
    value, g, path: CadlagPath, states, t: float, tol: float | None, rule: str
) -> float:
    outcome = locate_stop(value, g, path.times, states, t, tol)
    if outcome.horizon_fallback[0]:
        logger.warning("%s missed contact on a single path; stopping at the horizon", rule)
    return float(outcome.time[0])


def tau_star(value, g, path: CadlagPath, t: float = 0.0, tol: float | None = None) -> float:
    return _first_stop(value, g, path, path.values, t, tol, "tau*")


def sigma_star(value, g, path: CadlagPath, t: float = 0.0, tol: float | None = None) -> float:
    return _first_stop(value, g, path, path.pre_values, t, tol, "sigma*")


def theta_star(value, g, path: CadlagPath, t: float = 0.0, tol: float | None = None) -> float:
    return min(tau_star(value, g, path, t, tol), sigma_star(value, g, path, t, tol))


@dataclass(frozen=True)
class StopRule:
    """kind plus contact_tol; an unset contact_tol defers to the value field's default."""

    kind: str = "theta_star"
    contact_tol: float | None = None
    time: float | None = None

    def __post_init__(self):
        if self.kind not in RULE_KINDS:
            raise ConfigurationError(f"unknown stop rule {self.kind!r}")
        if self.contact_tol is not None and self.contact_tol < 0:
            raise ConfigurationError("contact_tol must be nonnegative")
        if self.kind == "fixed" and self.time is None:
            raise ConfigurationError("fixed stop rule needs a time")

    def apply(self, value, g, path: CadlagPath, t: float = 0.0) -> float:
        if self.kind == "fixed":
            return float(path.times[node_index(path.times, self.time)])
        if self.kind == "horizon":
            return float(path.times[-1])
        rule = {"tau_star": tau_star, "sigma_star": sigma_star, "theta_star": theta_star}
        return rule[self.kind](value, g, path, t, self.contact_tol)


@dataclass(frozen=True, eq=False)
class StopEvaluation:
    """Stop nodes and payoffs of tau*, sigma*, theta* for a batch of paths."""

    tau: np.ndarray
    sigma: np.ndarray
    theta: np.ndarray
    payoff_tau: np.ndarray
    payoff_sigma: np.ndarray
    payoff_theta: np.ndarray
    fallbacks: int
    extrapolated: int

    HEADER = ["path_id", "tau_star", "sigma_star", "theta_star",
              "payoff_tau", "payoff_sigma", "payoff_theta"]

    def rows(self, path_ids, times: np.ndarray) -> list[list[Any]]:
        return [
            [int(pid), float(times[a]), float(times[b]), float(times[c]),
             float(ja), float(jb), float(jc)]
            for pid, a, b, c, ja, jb, jc in zip(
                path_ids, self.tau, self.sigma, self.theta,
                self.payoff_tau, self.payoff_sigma, self.payoff_theta,
            )
        ]


def evaluate_stop_rules(
    spec,
    value,
    g,
    times: np.ndarray,
    values: np.ndarray,
    pre_values: np.ndarray,
    atoms: np.ndarray,
    density: np.ndarray,
    t: float = 0.0,
    tol: float | None = None,
) -> StopEvaluation:
    """Vectorised tau*, sigma*, theta* and their payoffs over (n, N+1, d) paths."""
    right = locate_stop(value, g, times, values, t, tol)
    left = locate_stop(value, g, times, pre_values, t, tol)
    theta = np.minimum(right.node, left.node)

    def payoff(idx):
        return payoff_at_stops(spec, times, values, atoms, density, idx, t)

    return StopEvaluation(
        tau=right.node,
        sigma=left.node,
        theta=theta,
        payoff_tau=payoff(right.node),
        payoff_sigma=payoff(left.node),
        payoff_theta=payoff(theta),
        fallbacks=int(np.sum(right.horizon_fallback & left.horizon_fallback)),
        extrapolated=right.extrapolated + left.extrapolated,
    )


def stop_rule_payoff_gap(
    spec,
    value,
    g,
    paths: list[CadlagPath],
    control: ControlPath | None = None,
    t: float = 0.0,
    tol: float | None = None,
) -> MomentEstimate:
    """Mean and standard error of J(tau*) - J(theta*) over the paths.

    Each path is charged with its own realised control unless control is given.
    """
    if not paths:
        raise ConfigurationError("stop_rule_payoff_gap needs paths")
    times = paths[0].times
    values = np.stack([p.values for p in paths])
    pre = np.stack([p.pre_values for p in paths])
    controls = [control if control is not None else p.control for p in paths]
    atoms = np.stack([c.atoms for c in controls])
    density = np.stack([c.density for c in controls])
    ev = evaluate_stop_rules(spec, value, g, times, values, pre, atoms, density, t, tol)
    gaps = ev.payoff_tau - ev.payoff_theta
    if len(paths) == 1:
        return MomentEstimate(float(gaps[0]), 0.0, 1)
    return mc_estimate(gaps)
