"""gamelab simulate - coupled paths, their drivers and coupling moments."""

from pathlib import Path

import click
import numpy as np

from gamelab.commands._common import experiment_options, finish, guarded, prepare
from gamelab.exceptions import InvariantViolationError
from gamelab.sde.engine import coupled_sup_distances, mc_estimate, simulate_coupled


@click.command()
@experiment_options
@click.option("--paths", "n_export", type=click.IntRange(min=1), default=1, show_default=True,
              help="Number of coupled samples written to CSV")
@guarded
def simulate_cmd(config_path: Path, out_dir, seed, threads, verbose, quiet, n_export: int):
    """Simulate the base path and its perturbed companions.

    Writes paths.csv (one block per path and gamma), drivers.csv and
    moments.csv with E[sup |X^gamma - X|] for every configured gamma.
    """
    ctx = prepare("simulate", config_path, out_dir, seed, threads, verbose, quiet)
    cfg, spec = ctx.config, ctx.spec
    sim = cfg.simulation
    control = sim.control_family()
    gammas = [float(g) for g in sim.gammas]
    verdict = ctx.verdict()

    path_rows, driver_rows, path_header, driver_header = [], [], [], []
    bookkeeping_failures = 0
    for index in range(n_export):
        sample = simulate_coupled(
            spec, control, cfg.seed, gammas or [0.0], ctx.x0, sim.n_steps, cfg.t0, path_index=index
        )
        for gamma, path in sorted({0.0: sample.base, **sample.perturbed}.items()):
            try:
                path.check_jumps()
            except InvariantViolationError:
                bookkeeping_failures += 1
            header, rows = path.table()
            path_header = ["path_id", "gamma", *header]
            path_rows += [[index, gamma, *row] for row in rows]
        header, rows = sample.driver.table()
        driver_header = ["path_id", *header]
        driver_rows += [[index, *row] for row in rows]
    ctx.writer.csv("paths.csv", path_header, path_rows)
    ctx.writer.csv("drivers.csv", driver_header, driver_rows)
    verdict.add("jump_bookkeeping", bookkeeping_failures == 0, bookkeeping_failures, 0)

    positive = [g for g in gammas if g > 0]
    if positive and sim.n_paths >= 2:
        distances = coupled_sup_distances(
            spec, control, cfg.seed, positive, ctx.x0, sim.n_paths, sim.n_steps, cfg.t0,
            threads=ctx.threads, progress=ctx.progress,
        )
        rows = []
        for col, gamma in enumerate(positive):
            for p in sim.p:
                est = mc_estimate(distances[:, col] ** p)
                rows.append([gamma, p, est.mean, est.stderr, est.n])
        ctx.writer.csv("moments.csv", ["gamma", "p", "mean", "stderr", "n"], rows)
        verdict.add("finite_moments", bool(np.all(np.isfinite(distances))))
    finish(ctx, verdict)
