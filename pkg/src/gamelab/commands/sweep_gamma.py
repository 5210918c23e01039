"""gamelab sweep-gamma - coupling rate E[sup |X^gamma - X|^p] against gamma."""

from pathlib import Path

import click

from gamelab.commands._common import console, experiment_options, finish, guarded, prepare
from gamelab.lab.fitting import SweepReport
from gamelab.lab.sweeps import gamma_sweeps
from gamelab.ui.display import sweep_table


@click.command()
@experiment_options
@guarded
def sweep_gamma_cmd(config_path: Path, out_dir, seed, threads, verbose, quiet):
    """Fit the coupling rate for every moment order in simulation.p.

    Needs at least five gammas in (0, 1) and 1000 paths. Writes
    sweep_gamma.csv (long format) and sweep_gamma.json (fits).
    """
    ctx = prepare("sweep-gamma", config_path, out_dir, seed, threads, verbose, quiet)
    cfg, sim = ctx.config, ctx.config.simulation
    reports = gamma_sweeps(
        ctx.spec, sim.control_family(), sim.gammas, sim.n_paths, sim.p, cfg.seed, ctx.x0,
        sim.n_steps, cfg.t0, cfg.tolerances.min_r2, ctx.threads, ctx.progress,
    )
    rows = [row for report in reports for row in report.long_rows()]
    ctx.writer.csv("sweep_gamma.csv", SweepReport.CSV_HEADER, rows)
    ctx.writer.json("sweep_gamma.json", {"reports": [r.to_dict() for r in reports]})

    verdict = ctx.verdict()
    for report in reports:
        if not quiet:
            console.print(sweep_table(report))
        verdict.checks.extend(report.checks)
    finish(ctx, verdict)
