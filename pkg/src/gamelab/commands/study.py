"""Study commands: value rate, optimality gap, stop-rule structure and liminf."""

import logging
from pathlib import Path

import click
import numpy as np

from gamelab.commands._common import (
    RunContext,
    console,
    experiment_options,
    finish,
    guarded,
    prepare,
)
from gamelab.core.artifacts import Verdict
from gamelab.exceptions import ConfigurationError, InsufficientSweepPointsError
from gamelab.lab.fitting import SweepReport
from gamelab.lab.studies import (
    StudyReport,
    optimality_gap_study,
    stop_structure_study,
    stopping_liminf_check,
)
from gamelab.lab.sweeps import solve_many, value_rate_study
from gamelab.model.controls import ControlFamily
from gamelab.ui.display import sweep_table
from gamelab.vi.diagnostics import gradient_bound_check
from gamelab.vi.oracle import lattice_oracle

logger = logging.getLogger(__name__)


def _study_gamma(ctx: RunContext) -> float:
    """Smallest simulation gamma; payoff references need none."""
    gammas = [float(g) for g in ctx.config.simulation.gammas]
    if gammas:
        return min(gammas)
    if ctx.config.study.reference == "payoff":
        return 0.0
    raise ConfigurationError("need a gamma to solve the value", field_path="simulation.gammas")


def _write_study(ctx: RunContext, stem: str, report: StudyReport, verdict: Verdict) -> None:
    ctx.writer.csv(f"{stem}.csv", report.header, report.rows)
    ctx.writer.json(f"{stem}.json", report.to_dict())
    verdict.checks.extend(report.checks)


# =============================================================================
# study-rate
# =============================================================================

@click.command()
@experiment_options
@guarded
def study_rate_cmd(config_path: Path, out_dir, seed, threads, verbose, quiet):
    """Rate of u^gamma towards the value as gamma decreases.

    study.reference "cauchy" fits sup |u^gamma - u^{gamma/2}|; "payoff"
    fits sup |u^gamma - g| for specs whose value is g. Every solved grid is
    also checked against the gradient bound |grad u| <= f.
    """
    ctx = prepare("study-rate", config_path, out_dir, seed, threads, verbose, quiet)
    cfg, spec = ctx.config, ctx.spec
    tol = cfg.tolerances
    report, grids = value_rate_study(
        spec, cfg.simulation.gammas, cfg.grid_params(spec.d), cfg.schedule, cfg.study.reference,
        min_r2=tol.min_r2, threads=ctx.threads,
    )

    verdict = ctx.verdict()
    verdict.checks.extend(report.checks)
    gradient_rows = []
    for gamma in sorted(grids, reverse=True):
        grad = gradient_bound_check(grids[gamma], spec.f, tol.grad_tol)
        gradient_rows.append([gamma, grad.max_ratio, grad.active_nodes])
        verdict.add(f"gradient_bound_g{gamma:g}", grad.passed, grad.max_ratio, grad.threshold,
                    grad.witness)

    ctx.writer.csv("study_rate.csv", SweepReport.CSV_HEADER, report.long_rows())
    ctx.writer.csv("study_rate.gradient.csv", ["gamma", "max_ratio", "active_nodes"], gradient_rows)
    ctx.writer.json("study_rate.json", {"report": report.to_dict()})
    if not quiet:
        console.print(sweep_table(report))
    finish(ctx, verdict)


# =============================================================================
# study-optimality
# =============================================================================

@click.command()
@experiment_options
@guarded
def study_optimality_cmd(config_path: Path, out_dir, seed, threads, verbose, quiet):
    """Play every control in study.controls against theta* and compare with the value.

    The value is v = g with study.reference "payoff", otherwise u^gamma at
    the smallest simulation gamma, played on the matching X^gamma paths.
    """
    ctx = prepare("study-optimality", config_path, out_dir, seed, threads, verbose, quiet)
    cfg, spec = ctx.config, ctx.spec
    sim, study = cfg.simulation, cfg.study
    gamma = _study_gamma(ctx)
    value, g, reference_value, field = ctx.value_fields(gamma)

    report = optimality_gap_study(
        spec, study.control_families(), sim.n_paths, value, g, reference_value, cfg.seed,
        ctx.x0, sim.n_steps, cfg.t0, cfg.tolerances.contact_tol, study.budget,
        study.min_controls, ctx.threads, ctx.progress,
        gamma=0.0 if field is None else gamma,
    )
    if spec.d == 1:
        try:
            oracle = lattice_oracle(
                spec, gamma, study.oracle_steps, cfg.grid.half_width, cfg.t0, [cfg.t0]
            )
            report.metrics["stopping_oracle"] = float(oracle.value(cfg.t0, ctx.x0)[0])
        except ConfigurationError as e:
            logger.debug("No stopping oracle: %s", e)

    verdict = ctx.verdict()
    _write_study(ctx, "study_optimality", report, verdict)
    finish(ctx, verdict)


# =============================================================================
# study-stops
# =============================================================================

@click.command()
@experiment_options
@guarded
def study_stops_cmd(config_path: Path, out_dir, seed, threads, verbose, quiet):
    """Compare tau*, sigma* and theta* on continuous and jumping controls.

    study.controls lists the continuous controls and study.jump_control
    the control that jumps out of the contact set. Writes per-path stop
    records for the jump control.
    """
    ctx = prepare("study-stops", config_path, out_dir, seed, threads, verbose, quiet)
    cfg, spec = ctx.config, ctx.spec
    sim, study = cfg.simulation, cfg.study
    if study.jump_control is None:
        raise ConfigurationError(
            "study-stops needs a jump control", field_path="study.jump_control"
        )
    jump = ControlFamily.from_dict(study.jump_control, "study.jump_control")
    continuous = study.control_families() or [ControlFamily.from_dict({"kind": "zero"})]
    value, g, reference_value, _ = ctx.value_fields(_study_gamma(ctx))

    report = stop_structure_study(
        spec, value, g, continuous, jump, sim.n_paths, cfg.seed, ctx.x0, sim.n_steps, cfg.t0,
        cfg.tolerances.contact_tol, study.min_fraction, ctx.threads, ctx.progress,
    )
    report.metrics["reference_value"] = reference_value

    verdict = ctx.verdict()
    _write_study(ctx, "stop_records", report, verdict)
    finish(ctx, verdict)


# =============================================================================
# study-liminf
# =============================================================================

@click.command()
@experiment_options
@guarded
def study_liminf_cmd(config_path: Path, out_dir, seed, threads, verbose, quiet):
    """Check that theta*^gamma does not stop early along a decreasing gamma sequence.

    Solves u^gamma for every simulation gamma. The base-path reference is
    the smallest-gamma solution, or g with study.reference "payoff".
    """
    ctx = prepare("study-liminf", config_path, out_dir, seed, threads, verbose, quiet)
    cfg, spec = ctx.config, ctx.spec
    sim, study, tol = cfg.simulation, cfg.study, cfg.tolerances
    if len(set(sim.gammas)) < study.last:
        raise InsufficientSweepPointsError(
            f"need at least {study.last} gammas", field_path="simulation.gammas"
        )
    grids = solve_many(
        spec, sim.gammas, cfg.grid_params(spec.d), cfg.schedule, tol.contact_tol, tol.grad_tol,
        ctx.threads,
    )
    reference = "payoff" if study.reference == "payoff" else None

    report = stopping_liminf_check(
        spec, sim.control_family(), grids, sim.n_paths, cfg.seed, ctx.x0, sim.n_steps, cfg.t0,
        reference, tol.contact_tol, study.last, study.slack_steps, study.max_fraction,
        ctx.threads, ctx.progress,
    )
    report.metrics["obstacle_gaps"] = {
        f"{g:g}": float(np.min(ug.u - ug.g)) for g, ug in sorted(grids.items())
    }

    verdict = ctx.verdict()
    _write_study(ctx, "study_liminf", report, verdict)
    finish(ctx, verdict)
