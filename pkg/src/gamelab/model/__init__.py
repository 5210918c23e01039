"""Game specifications, controls, payoffs and assumption checks."""

from gamelab.model.controls import ControlFamily, ControlPath, make_control
from gamelab.model.spec import AssumptionProfile, GameSpec, load_spec

__all__ = [
    "AssumptionProfile",
    "ControlFamily",
    "ControlPath",
    "GameSpec",
    "load_spec",
    "make_control",
]
