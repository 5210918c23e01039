"""Main CLI entry point for gamelab."""

import click

from gamelab import __version__
from gamelab.commands.report import report_cmd
from gamelab.commands.simulate import simulate_cmd
from gamelab.commands.solve_vi import solve_vi_cmd
from gamelab.commands.study import (
    study_liminf_cmd,
    study_optimality_cmd,
    study_rate_cmd,
    study_stops_cmd,
)
from gamelab.commands.sweep_gamma import sweep_gamma_cmd
from gamelab.commands.sweep_mollify import sweep_mollify_cmd
from gamelab.commands.validate import validate_cmd


@click.group()
@click.version_option(version=__version__, prog_name="gamelab")
def main():
    """gamelab - controller-vs-stopper games with degenerate diffusions.

    Every experiment command reads a YAML/JSON config, writes CSV and JSON
    artifacts tagged with the config hash and seed, and exits 0 when all
    checks pass, 2 when one fails, 1 on execution errors and 3 on schema
    errors.

    \b
    Model:
      gamelab validate --config C      Sampled assumption checks

    \b
    Simulation:
      gamelab simulate --config C      Coupled paths and moments
      gamelab sweep-gamma --config C   Coupling rate in gamma

    \b
    Variational inequality:
      gamelab solve-vi --config C      Penalised solve, residual, oracle
      gamelab study-rate --config C    Rate of u^gamma in gamma
      gamelab sweep-mollify --config C Smoothed payoff sweep

    \b
    Stopping:
      gamelab study-optimality --config C   No control beats the value
      gamelab study-stops --config C        tau* against theta*
      gamelab study-liminf --config C       theta*^gamma along gamma -> 0

    \b
    Reporting:
      gamelab report --out DIR         Consolidate verdicts
    """
    pass


# Model and simulation
main.add_command(validate_cmd, name="validate")
main.add_command(simulate_cmd, name="simulate")
main.add_command(sweep_gamma_cmd, name="sweep-gamma")

# Variational inequality
main.add_command(solve_vi_cmd, name="solve-vi")
main.add_command(study_rate_cmd, name="study-rate")
main.add_command(sweep_mollify_cmd, name="sweep-mollify")

# Stopping studies
main.add_command(study_optimality_cmd, name="study-optimality")
main.add_command(study_stops_cmd, name="study-stops")
main.add_command(study_liminf_cmd, name="study-liminf")

# Reporting
main.add_command(report_cmd, name="report")


if __name__ == "__main__":
    main()
