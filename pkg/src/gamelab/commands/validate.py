"""gamelab validate - sampled assumption checks of the configured GameSpec."""

from pathlib import Path

import click
from rich.table import Table

from gamelab.commands._common import console, experiment_options, finish, guarded, prepare
from gamelab.model.assumptions import sample_box, validate_assumptions

SAMPLE_POINTS = 400


@click.command()
@experiment_options
@guarded
def validate_cmd(config_path: Path, out_dir, seed, threads, verbose, quiet):
    """Estimate the assumption constants over the grid box.

    Required checks enter the verdict; informational ones (growth constants
    of relaxed profiles, D3) are listed in assumptions.json only.
    """
    ctx = prepare("validate", config_path, out_dir, seed, threads, verbose, quiet)
    cfg, spec = ctx.config, ctx.spec
    spec.check_invariants(half_width=cfg.grid.half_width)
    points = sample_box(spec.d, cfg.grid.half_width, SAMPLE_POINTS, cfg.seed)
    report = validate_assumptions(spec, points)
    ctx.writer.json("assumptions.json", report.to_dict())

    verdict = ctx.verdict()
    for check in report.checks:
        if check.required:
            verdict.add(check.name, check.passed, check.value, check.threshold, check.witness)

    if not quiet:
        table = Table(title=f"{spec.name} ({report.variant})", border_style="border.dim")
        table.add_column("Constant", style="title")
        table.add_column("Estimate", justify="right")
        table.add_column("Role", style="text.dim")
        for check in report.checks:
            role = "required" if check.required else "info"
            table.add_row(check.name, f"{check.value:.6g}", role)
        console.print(table)
    finish(ctx, verdict)
