"""gamelab report - consolidate the verdicts of an output directory."""

import hashlib
from pathlib import Path

import click

from gamelab.commands._common import (
    EXIT_FAIL,
    EXIT_OK,
    console,
    guarded,
    setup_logging,
)
from gamelab.core.artifacts import consolidate, write_csv, write_json
from gamelab.ui.display import show_summary

REPORT_JSON = "report.json"
REPORT_CSV = "report_checks.csv"


def _digest(hashes: list[str]) -> str:
    if len(hashes) == 1:
        return hashes[0]
    return hashlib.sha256("\n".join(hashes).encode()).hexdigest()[:16]


@click.command()
@click.option("--out", "out_dir", type=click.Path(path_type=Path), required=True,
              help="Output directory holding verdict blocks")
@click.option("--verbose", "-v", is_flag=True, help="Debug logging")
@click.option("--quiet", "-q", is_flag=True, help="Warnings only")
@guarded
def report_cmd(out_dir: Path, verbose: bool, quiet: bool):
    """Merge every verdict in --out into report.json and report_checks.csv.

    Artifacts listed by a verdict must carry its config hash. Exits 0 when
    every verdict passes and 2 otherwise.
    """
    setup_logging(verbose, quiet)
    consolidated = consolidate(out_dir)
    digest = _digest(consolidated["config_hashes"])
    seeds = {v.get("seed") for v in consolidated["verdicts"]}
    seed = seeds.pop() if len(seeds) == 1 else None

    write_json(out_dir / REPORT_JSON, {"config_hash": digest, **consolidated})
    rows = [
        [v["command"], c["name"], c["passed"], c.get("value"), c.get("threshold")]
        for v in consolidated["verdicts"]
        for c in v["checks"]
    ]
    write_csv(
        out_dir / REPORT_CSV, ["command", "check", "passed", "value", "threshold"], rows,
        digest, seed,
    )
    show_summary(console, consolidated)
    raise SystemExit(EXIT_OK if consolidated["passed"] else EXIT_FAIL)
