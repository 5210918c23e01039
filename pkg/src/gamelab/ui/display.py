"""Rich tables and panels for verdicts, sweeps and consolidated reports."""

from typing import Any

from rich.console import Console
from rich.panel import Panel
from rich.table import Table

from gamelab.ui.theme import Symbols


def _status(ok: bool) -> str:
    if ok:
        return f"[verdict.pass]{Symbols.PASS} pass[/]"
    return f"[verdict.fail]{Symbols.FAIL} fail[/]"


def _fmt(value: Any) -> str:
    if value is None:
        return "-"
    if isinstance(value, bool):
        return str(value)
    if isinstance(value, float):
        return f"{value:.6g}"
    if isinstance(value, (list, tuple)):
        return "[" + ", ".join(_fmt(v) for v in value) + "]"
    return str(value)


def verdict_table(verdict: dict) -> Table:
    table = Table(title=f"{verdict['command']} checks", show_lines=False, border_style="border.dim")
    table.add_column("Check", style="title")
    table.add_column("Status")
    table.add_column("Value", justify="right")
    table.add_column("Threshold", justify="right")
    for check in verdict["checks"]:
        table.add_row(
            check["name"], _status(check["passed"]), _fmt(check.get("value")),
            _fmt(check.get("threshold")),
        )
    return table


def show_verdict(console: Console, verdict: dict) -> None:
    """Print a verdict table followed by a one-line outcome panel."""
    console.print(verdict_table(verdict))
    artifacts = verdict.get("artifacts", [])
    outcome = _status(verdict["passed"])
    console.print(Panel(
        f"{outcome}  [text.dim]config {verdict['config_hash']} · seed {verdict.get('seed')} · "
        f"{len(artifacts)} artifacts[/]",
        border_style="border",
        expand=False,
    ))


def sweep_table(report) -> Table:
    """Rows of a SweepReport with its fit in the caption."""
    table = Table(title=report.name, border_style="border.dim")
    for name in report.param_names:
        table.add_column(name, justify="right")
    table.add_column("Statistic", style="subtitle")
    table.add_column("Mean", justify="right")
    table.add_column("Std. err.", justify="right")
    table.add_column("n", justify="right")
    for row in report.rows:
        table.add_row(
            *[_fmt(v) for v in row.param], row.statistic, _fmt(row.mean), _fmt(row.stderr),
            str(row.n),
        )
    if report.fit is not None:
        table.caption = (
            f"slope {report.fit.slope:.4f} · R² {report.fit.r_squared:.4f} · "
            f"{report.fit.n_used} rows fitted"
        )
    elif report.notes:
        table.caption = "; ".join(report.notes)
    return table


def show_summary(console: Console, consolidated: dict) -> None:
    """Consolidated report: one row per verdict, then the failures with witnesses."""
    table = Table(title="gamelab report", border_style="border.dim")
    table.add_column("Command", style="title")
    table.add_column("Status")
    table.add_column("Checks", justify="right")
    table.add_column("Config", style="text.dim")
    for v in consolidated["verdicts"]:
        table.add_row(v["command"], _status(v["passed"]), str(len(v["checks"])), v["config_hash"])
    console.print(table)

    failures = consolidated["failures"]
    if failures:
        lines = [
            f"{Symbols.ARROW_RIGHT} {f['command']}/{f['name']}: value {_fmt(f.get('value'))} "
            f"threshold {_fmt(f.get('threshold'))}"
            + (f"\n    witness {f['witness']}" if f.get("witness") is not None else "")
            for f in failures
        ]
        console.print(
            Panel("\n".join(lines), title="[verdict.fail]Failures[/]", border_style="error")
        )
    console.print(
        f"[verdict.pass]{consolidated['n_pass']} pass[/]  "
        f"[verdict.fail]{consolidated['n_fail']} fail[/]"
    )
