"""gamelab solve-vi - penalised VI solves with residual, gradient and oracle checks."""

import logging
from pathlib import Path

import click
import numpy as np

from gamelab.commands._common import experiment_options, finish, guarded, prepare
from gamelab.exceptions import ConfigurationError
from gamelab.vi.bundle import write_bundle
from gamelab.vi.diagnostics import contact_boundary, gradient_bound_check, obstacle_gap
from gamelab.vi.oracle import lattice_oracle
from gamelab.vi.solver import solve_vi

logger = logging.getLogger(__name__)


def bundle_stem(gamma: float) -> str:
    return f"value_grid_g{gamma:g}"


@click.command()
@experiment_options
@guarded
def solve_vi_cmd(config_path: Path, out_dir, seed, threads, verbose, quiet):
    """Solve the penalised variational inequality for each simulation gamma.

    Every solve writes a ValueGrid bundle and a contact boundary CSV
    (d = 1). With study.probe_points set and constant 1-d coefficients the
    solution is compared with the lattice oracle.
    """
    ctx = prepare("solve-vi", config_path, out_dir, seed, threads, verbose, quiet)
    cfg, spec = ctx.config, ctx.spec
    tol = cfg.tolerances
    gammas = [float(g) for g in cfg.simulation.gammas]
    if not gammas:
        raise ConfigurationError(
            "solve-vi needs at least one gamma", field_path="simulation.gammas"
        )
    verdict = ctx.verdict()
    params = cfg.grid_params(spec.d)

    for gamma in gammas:
        ug = solve_vi(
            spec, gamma, params, cfg.schedule, tol.contact_tol, tol.grad_tol, ctx.progress
        )
        stem = bundle_stem(gamma)
        write_bundle(ctx.writer, ug, stem)
        tag = f"g{gamma:g}"

        summary = ug.summary
        verdict.add(f"residual_minmax_p99_{tag}", summary["minmax_p99"] <= tol.residual_tol,
                    summary["minmax_p99"], tol.residual_tol)
        verdict.add(f"residual_maxmin_p99_{tag}", summary["maxmin_p99"] <= tol.residual_tol,
                    summary["maxmin_p99"], tol.residual_tol)
        grad = gradient_bound_check(ug, spec.f, tol.grad_tol)
        verdict.add(f"gradient_bound_{tag}", grad.passed, grad.max_ratio, grad.threshold,
                    grad.witness)
        gap = obstacle_gap(ug)
        contact_tol = summary["contact_tol"]
        verdict.add(f"dominance_{tag}", gap >= -10 * contact_tol, gap, -10 * contact_tol)

        if spec.d == 1:
            boundary = contact_boundary(ug, contact_tol)
            ctx.writer.csv(
                f"{stem}.boundary.csv", ["t", "boundary"],
                [[float(t), float(b)] for t, b in zip(ug.t_nodes, boundary)],
            )
        if cfg.study.probe_points:
            _oracle_check(ctx, ug, gamma, verdict, tag)

    finish(ctx, verdict)


def _oracle_check(ctx, ug, gamma: float, verdict, tag: str) -> None:
    cfg, spec = ctx.config, ctx.spec
    try:
        oracle = lattice_oracle(
            spec, gamma, cfg.study.oracle_steps, cfg.grid.half_width, cfg.t0, [cfg.t0]
        )
    except ConfigurationError as e:
        logger.info("Lattice oracle skipped: %s", e)
        return
    probes = np.asarray(cfg.study.probe_points, dtype=float)
    row = int(np.argmin(np.abs(ug.t_nodes - cfg.t0)))
    solved = np.interp(probes, ug.axes[0], ug.u[row])
    reference = oracle.value(cfg.t0, probes)
    rel = np.abs(solved - reference) / np.maximum(np.abs(reference), 1e-12)
    worst = int(np.argmax(rel))
    ctx.writer.csv(
        f"{bundle_stem(gamma)}.oracle.csv", ["x", "u", "oracle", "rel_error"],
        np.column_stack([probes, solved, reference, rel]).tolist(),
    )
    verdict.add(
        f"oracle_rel_error_{tag}", float(rel[worst]) <= cfg.tolerances.oracle_rel_tol,
        float(rel[worst]), cfg.tolerances.oracle_rel_tol,
        {"x": float(probes[worst]), "u": float(solved[worst]), "oracle": float(reference[worst])},
    )
