"""Shared plumbing for the experiment subcommands.

Exit statuses: 0 all checks pass, 2 a check failed, 1 execution error,
3 schema violation.
"""

import functools
import logging
import os
from collections.abc import Callable
from dataclasses import dataclass
from pathlib import Path
from typing import Any

import click
import numpy as np
from rich.console import Console
from rich.logging import RichHandler

from gamelab.concurrency import THREADS_ENV, resolve_threads
from gamelab.core.artifacts import ArtifactWriter, Verdict
from gamelab.core.config import ExperimentConfig, config_hash, load_config
from gamelab.exceptions import GameLabError, InsufficientSweepPointsError, SchemaError
from gamelab.model.spec import GameSpec
from gamelab.stopping.value_field import ValueField
from gamelab.ui.display import show_verdict
from gamelab.ui.theme import THEME
from gamelab.vi.solver import solve_vi

logger = logging.getLogger("gamelab")

console = Console(theme=THEME)
err_console = Console(theme=THEME, stderr=True)

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_FAIL = 2
EXIT_SCHEMA = 3


def setup_logging(verbose: bool = False, quiet: bool = False) -> None:
    level = logging.DEBUG if verbose else logging.WARNING if quiet else logging.INFO
    root = logging.getLogger("gamelab")
    root.handlers.clear()
    root.addHandler(RichHandler(console=err_console, show_path=verbose, markup=False))
    root.setLevel(level)
    root.propagate = False


def experiment_options(fn: Callable) -> Callable:
    """--config, --out, --seed, --threads, --verbose, --quiet."""
    options = [
        click.option("--config", "config_path", type=click.Path(path_type=Path), required=True,
                     help="Experiment config (YAML or JSON)"),
        click.option("--out", "out_dir", type=click.Path(path_type=Path), default=None,
                     help="Output directory (overrides the config)"),
        click.option("--seed", type=int, default=None, help="Seed (overrides the config)"),
        click.option("--threads", type=int, default=None,
                     help="Worker threads (falls back to GAMELAB_THREADS)"),
        click.option("--verbose", "-v", is_flag=True, help="Debug logging"),
        click.option("--quiet", "-q", is_flag=True, help="Warnings only, no progress bars"),
    ]
    for option in reversed(options):
        fn = option(fn)
    return fn


@dataclass
class RunContext:
    command: str
    config: ExperimentConfig
    spec: GameSpec
    config_hash: str
    writer: ArtifactWriter
    threads: int
    progress: bool

    @property
    def x0(self) -> np.ndarray:
        return np.asarray(self.config.x0, dtype=float)

    @property
    def out_dir(self) -> Path:
        return self.writer.out_dir

    def verdict(self) -> Verdict:
        return self.writer.verdict(self.command)

    def value_fields(self, gamma: float) -> tuple[Any, Any, float, ValueField | None]:
        """(value, obstacle, value at (t0, x0), solved field or None).

        study.reference == "payoff" plays v = g; otherwise u^gamma is solved.
        """
        cfg = self.config
        if cfg.study.reference == "payoff":
            ref = float(np.asarray(self.spec.g(cfg.t0, self.x0[None]))[0])
            return self.spec.g, self.spec.g, ref, None
        ug = solve_vi(
            self.spec, gamma, cfg.grid_params(self.spec.d), cfg.schedule,
            cfg.tolerances.contact_tol, cfg.tolerances.grad_tol, self.progress,
        )
        field = ValueField(ug)
        ref = float(np.asarray(field(cfg.t0, self.x0[None]))[0])
        return field, field.obstacle, ref, field


def _threads(flag: int | None, configured: int | None) -> int:
    if flag:
        return resolve_threads(flag)
    if os.environ.get(THREADS_ENV):
        return resolve_threads(None)
    return resolve_threads(configured)


def prepare(command: str, config_path: Path, out_dir: Path | None, seed: int | None,
            threads: int | None, verbose: bool, quiet: bool) -> RunContext:
    setup_logging(verbose, quiet)
    config, spec = load_config(config_path, seed, str(out_dir) if out_dir else None, threads)
    digest = config_hash(config, spec)
    out = Path(config.output_dir)
    if not out.is_absolute() and out_dir is None:
        out = config_path.parent / out
    logger.info("%s: spec %r, config %s, seed %d", command, spec.name, digest, config.seed)
    return RunContext(
        command=command,
        config=config,
        spec=spec,
        config_hash=digest,
        writer=ArtifactWriter(out, digest, config.seed),
        threads=_threads(threads, config.threads),
        progress=not quiet,
    )


def finish(ctx: RunContext, verdict: Verdict) -> None:
    path = verdict.write(ctx.out_dir)
    show_verdict(console, verdict.to_dict())
    logger.debug("Verdict written to %s", path)
    raise SystemExit(EXIT_OK if verdict.passed else EXIT_FAIL)


def guarded(fn: Callable) -> Callable:
    """Map package errors onto the exit statuses."""

    @functools.wraps(fn)
    def wrapper(*args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except (SchemaError, InsufficientSweepPointsError) as e:
            err_console.print(f"[error]schema error:[/] {e}")
            raise SystemExit(EXIT_SCHEMA) from e
        except GameLabError as e:
            err_console.print(f"[error]{type(e).__name__}:[/] {e}")
            raise SystemExit(EXIT_ERROR) from e

    return wrapper
