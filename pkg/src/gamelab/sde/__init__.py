"""Euler-Maruyama simulation of controlled and perturbed paths."""

from gamelab.sde.engine import simulate_controlled, simulate_coupled
from gamelab.sde.paths import CadlagPath, CoupledSample

__all__ = ["CadlagPath", "CoupledSample", "simulate_controlled", "simulate_coupled"]
