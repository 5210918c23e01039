"""Penalised finite-difference solver for the variational inequality."""

from gamelab.vi.grid import GridParams, PenaltySchedule, ValueGrid
from gamelab.vi.solver import solve_vi

__all__ = ["GridParams", "PenaltySchedule", "ValueGrid", "solve_vi"]
