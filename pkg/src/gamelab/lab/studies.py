"""Monte Carlo studies of the stopper's rules against solved value fields."""

import logging
from collections.abc import Sequence
from dataclasses import dataclass, field
from typing import Any

import numpy as np

from gamelab.core.artifacts import Check, to_plain
from gamelab.exceptions import ConfigurationError, InsufficientSweepPointsError
from gamelab.model.controls import ControlFamily, check_class_bound
from gamelab.model.payoff import payoff_at_stops
from gamelab.sde.engine import PathBlock, map_path_blocks, mc_estimate
from gamelab.stopping.rules import StopEvaluation, evaluate_stop_rules, locate_stop
from gamelab.stopping.value_field import ValueField
from gamelab.vi.grid import ValueGrid

logger = logging.getLogger(__name__)

CONTINUOUS_KINDS = ("zero", "constant_density")


@dataclass
class StudyReport:
    name: str
    metrics: dict[str, Any] = field(default_factory=dict)
    checks: list[Check] = field(default_factory=list)
    header: list[str] = field(default_factory=list)
    rows: list[list[Any]] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def check(self, name: str, passed: bool, value=None, threshold=None, witness=None) -> Check:
        c = Check(name, bool(passed), value, threshold, witness)
        self.checks.append(c)
        return c

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "metrics": to_plain(self.metrics),
            "checks": [c.to_dict() for c in self.checks],
            "passed": self.passed,
        }


def _theta_nodes(
    value, g, block: PathBlock, gamma: float, t0: float, tol: float | None
) -> np.ndarray:
    i = block.gamma_index(gamma)
    right = locate_stop(value, g, block.times, block.values[i], t0, tol)
    left = locate_stop(value, g, block.times, block.pre_values[i], t0, tol)
    return np.minimum(right.node, left.node)


# =============================================================================
# liminf of theta*^gamma along a decreasing gamma sequence
# =============================================================================

def stopping_liminf_check(
    spec,
    control: Any,
    grids: dict[float, ValueGrid],
    n_paths: int,
    seed: int = 0,
    x0: Any = 0.0,
    n_steps: int = 200,
    t0: float = 0.0,
    reference: ValueGrid | str | None = None,
    tol: float | None = None,
    last: int = 3,
    slack_steps: int = 2,
    max_fraction: float = 0.05,
    threads: int | None = None,
    progress: bool = False,
) -> StudyReport:
    """Fraction of paths with min over the last gammas of theta*^gamma < theta* - slack.

    theta*^gamma is taken on the coupled perturbed path against u^gamma and
    theta* on the base path against the reference: the smallest-gamma grid
    by default, or v = g when reference == "payoff".
    """
    if len(grids) < last:
        raise InsufficientSweepPointsError(
            f"need value grids for at least {last} gammas, got {len(grids)}",
            field_path="simulation.gammas",
        )
    gammas = sorted(grids, reverse=True)
    fields = {g: ValueField(grids[g]) for g in gammas}
    if reference == "payoff":
        ref_value, ref_g = spec.g, spec.g
    else:
        if isinstance(reference, ValueGrid):
            ref_field = ValueField(reference)
        else:
            ref_field = fields[gammas[-1]]
        ref_value, ref_g = ref_field, ref_field.obstacle
    tail = gammas[-last:]

    def evaluate(block: PathBlock) -> tuple[np.ndarray, np.ndarray]:
        theta_ref = _theta_nodes(ref_value, ref_g, block, 0.0, t0, tol)
        per_gamma = [
            _theta_nodes(fields[g], fields[g].obstacle, block, g, t0, tol) for g in tail
        ]
        return theta_ref, np.min(np.stack(per_gamma), axis=0)

    parts = map_path_blocks(
        evaluate, spec, control, seed, gammas, x0, n_paths, n_steps, t0,
        threads=threads, progress=progress, desc="liminf",
    )
    theta_ref = np.concatenate([p[0] for p in parts])
    theta_tail = np.concatenate([p[1] for p in parts])
    violations = theta_tail < theta_ref - slack_steps
    fraction = float(np.mean(violations))
    dt = (spec.T - t0) / n_steps

    report = StudyReport("study-liminf")
    report.metrics = {
        "gammas": gammas,
        "tail": tail,
        "slack": slack_steps * dt,
        "violations": int(violations.sum()),
        "n_paths": int(n_paths),
        "mean_theta_reference": float(theta_ref.mean() * dt),
        "mean_theta_tail": float(theta_tail.mean() * dt),
        "extrapolations": int(sum(f.extrapolations for f in fields.values())),
    }
    witness = None
    if violations.any():
        k = int(np.argmax(violations))
        witness = {
            "path_id": k, "theta_reference": theta_ref[k] * dt, "theta_tail": theta_tail[k] * dt,
        }
    report.check("violation_fraction", fraction <= max_fraction, fraction, max_fraction, witness)
    report.header = ["path_id", "theta_reference", "theta_tail_min", "violation"]
    report.rows = [
        [i, float(a * dt), float(b * dt), bool(v)]
        for i, (a, b, v) in enumerate(zip(theta_ref, theta_tail, violations))
    ]
    logger.info("liminf check: %d of %d paths violate", violations.sum(), n_paths)
    return report


# =============================================================================
# No control in a family beats the value when the stopper plays theta*
# =============================================================================

def optimality_gap_study(
    spec,
    controls: Sequence[ControlFamily],
    n_paths: int,
    value,
    g,
    reference_value: float,
    seed: int = 0,
    x0: Any = 0.0,
    n_steps: int = 200,
    t0: float = 0.0,
    tol: float | None = None,
    budget: float = 0.0,
    min_controls: int = 10,
    threads: int | None = None,
    progress: bool = False,
    gamma: float = 0.0,
) -> StudyReport:
    """MC payoff of every control against theta* compared with the value at (t0, x0).

    Paths and value belong to the same game: with gamma > 0 the controls are
    played on the coupled X^gamma companion and reference_value is u^gamma;
    with gamma = 0 they run on the base dynamics and reference_value is v
    itself (v = g on the degenerate benchmark).

    Raises:
        ConfigurationError: fewer than min_controls controls
        ControlClassError: a control exceeds the restricted class bound
    """
    if len(controls) < min_controls:
        raise ConfigurationError(
            f"need at least {min_controls} controls, got {len(controls)}",
            field_path="study.controls",
        )
    x_start = np.atleast_1d(np.asarray(x0, dtype=float))

    def evaluate(block: PathBlock) -> tuple[np.ndarray, np.ndarray]:
        theta = _theta_nodes(value, g, block, gamma, t0, tol)
        payoff = payoff_at_stops(
            spec, block.times, block.values[block.gamma_index(gamma)], block.atoms,
            block.density, theta, t0,
        )
        dt = float(block.times[1] - block.times[0])
        totals = block.atoms.sum(axis=1) + block.density.sum() * dt
        return payoff, totals

    rows, worst = [], None
    companions = [gamma] if gamma > 0 else []
    for control in controls:
        parts = map_path_blocks(
            evaluate, spec, control, seed, companions, x_start, n_paths, n_steps, t0,
            threads=threads, progress=progress, desc=control.name,
        )
        payoffs = np.concatenate([p[0] for p in parts])
        totals = np.concatenate([p[1] for p in parts])
        mean_nu = check_class_bound(totals, x_start, spec.profile, control.name)
        est = mc_estimate(payoffs)
        gap = est.mean - reference_value
        margin = gap + 2 * est.stderr + budget
        rows.append([control.name, est.mean, est.stderr, est.n, gap, mean_nu])
        if worst is None or margin < worst[1]:
            worst = (control.name, margin, gap, est.stderr)
        logger.debug("%s: J = %.6g +- %.2g (gap %.3g)", control.name, est.mean, est.stderr, gap)

    report = StudyReport("study-optimality")
    report.header = ["control", "payoff_mean", "payoff_stderr", "n", "gap", "mean_nu"]
    report.rows = rows
    gaps = {r[0]: r[4] for r in rows}
    report.metrics = {
        "reference_value": float(reference_value),
        "gamma": float(gamma),
        "min_gap": float(min(gaps.values())),
        "budget": budget,
        "extrapolations": int(getattr(value, "extrapolations", 0)),
    }
    if "zero" in gaps:
        report.metrics["zero_gap"] = float(gaps["zero"])
    name, margin, gap, se = worst
    report.check(
        "no_control_beats_value", margin >= 0, gap, -(2 * se + budget),
        {"control": name, "stderr": se},
    )
    return report


# =============================================================================
# tau* against theta* on continuous and jumping controls
# =============================================================================

def stop_structure_study(
    spec,
    value,
    g,
    continuous_controls: Sequence[ControlFamily],
    jump_control: ControlFamily,
    n_paths: int,
    seed: int = 0,
    x0: Any = 0.0,
    n_steps: int = 200,
    t0: float = 0.0,
    tol: float | None = None,
    min_fraction: float = 0.01,
    threads: int | None = None,
    progress: bool = False,
) -> StudyReport:
    """Rules coincide node-exactly on continuous controls; theta* < tau* after contact-set jumps."""
    for c in continuous_controls:
        if c.kind not in CONTINUOUS_KINDS:
            raise ConfigurationError(
                f"{c.name} can jump; continuous controls are {CONTINUOUS_KINDS}",
                field_path="study.controls",
            )

    def evaluate(block: PathBlock) -> StopEvaluation:
        return evaluate_stop_rules(
            spec, value, g, block.times, block.values[0], block.pre_values[0],
            block.atoms, block.density, t0, tol,
        )

    def run(control: ControlFamily) -> list[StopEvaluation]:
        return map_path_blocks(
            evaluate, spec, control, seed, [], x0, n_paths, n_steps, t0,
            threads=threads, progress=progress, desc=control.name,
        )

    mismatches = 0
    for control in continuous_controls:
        for ev in run(control):
            mismatches += int(np.sum((ev.tau != ev.sigma) | (ev.theta != ev.tau)))

    jumped = run(jump_control)
    tau = np.concatenate([ev.tau for ev in jumped])
    theta = np.concatenate([ev.theta for ev in jumped])
    gaps = np.concatenate([ev.payoff_tau - ev.payoff_theta for ev in jumped])
    fraction = float(np.mean(theta < tau))
    est = mc_estimate(gaps)

    dt = (spec.T - t0) / n_steps
    times = np.arange(n_steps + 1) * dt
    report = StudyReport("study-stops")
    report.metrics = {
        "continuous_controls": [c.name for c in continuous_controls],
        "jump_control": jump_control.name,
        "mismatches": mismatches,
        "theta_before_tau_fraction": fraction,
        "payoff_gap": est.to_dict(),
        "payoff_gap_significant": bool(est.mean > 2 * est.stderr),
        "fallbacks": int(sum(ev.fallbacks for ev in jumped)),
        "extrapolations": int(sum(ev.extrapolated for ev in jumped)),
    }
    report.check("continuous_rules_coincide", mismatches == 0, mismatches, 0)
    report.check("theta_before_tau", fraction >= min_fraction, fraction, min_fraction)
    report.check("payoff_gap", est.mean >= -2 * est.stderr, est.mean, -2 * est.stderr)
    report.header = StopEvaluation.HEADER
    offset = 0
    for ev in jumped:
        ids = np.arange(offset, offset + ev.tau.shape[0])
        report.rows.extend(ev.rows(ids, times))
        offset += ev.tau.shape[0]
    return report
