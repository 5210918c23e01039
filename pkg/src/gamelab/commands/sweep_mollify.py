"""gamelab sweep-mollify - smoothed payoff trebles (j, k, m)."""

from pathlib import Path

import click

from gamelab.commands._common import console, experiment_options, finish, guarded, prepare
from gamelab.lab.fitting import SweepReport
from gamelab.lab.sweeps import mollify_sweep
from gamelab.ui.display import sweep_table


@click.command()
@experiment_options
@guarded
def sweep_mollify_cmd(config_path: Path, out_dir, seed, threads, verbose, quiet):
    """Mollify g, h and f over the configured j, k and m lists.

    Writes sweep_mollify.csv (sup errors, gradient ratios and, with
    mollify.solve, value gaps), mollified.csv with the smoothed payoffs and
    sweep_mollify.json.
    """
    ctx = prepare("sweep-mollify", config_path, out_dir, seed, threads, verbose, quiet)
    cfg, spec = ctx.config, ctx.spec
    mol = cfg.mollify
    solve = (cfg.grid_params(spec.d), cfg.schedule, mol.gamma) if mol.solve else None
    report, payoffs = mollify_sweep(
        spec, mol.js, mol.ks, mol.ms, mol.grad_tol, mol.error_factor, solve, ctx.threads
    )

    ctx.writer.csv("sweep_mollify.csv", SweepReport.CSV_HEADER, report.long_rows())
    table = []
    for mp in payoffs:
        h = mp.h.values
        table += [[mp.j, mp.k, mp.m, x, g, hv] for x, g, hv in zip(mp.x, mp.g.values, h)]
    ctx.writer.csv("mollified.csv", ["j", "k", "m", "x", "g", "h"], table)
    ctx.writer.json(
        "sweep_mollify.json",
        {"report": report.to_dict(), "trebles": [mp.to_dict() for mp in payoffs]},
    )

    if not quiet:
        console.print(sweep_table(report))
    verdict = ctx.verdict()
    verdict.checks.extend(report.checks)
    finish(ctx, verdict)
