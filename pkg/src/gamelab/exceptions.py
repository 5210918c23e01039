"""Unified exception hierarchy for gamelab.

All custom exceptions derive from GameLabError so callers can catch broadly
or narrowly as needed. The CLI maps them onto its exit statuses.
"""


class GameLabError(Exception):
    """Base exception for all gamelab operations."""


# ── Configuration exceptions ────────────────────────────────────────

class ConfigurationError(GameLabError):
    """Invalid parameters, grids or experiment setup."""

    def __init__(self, message: str, field_path: str | None = None):
        if field_path:
            message = f"{field_path}: {message}"
        super().__init__(message)
        self.field_path = field_path


class SchemaError(ConfigurationError):
    """Experiment config or GameSpec document violates the schema."""


class GridMismatchError(ConfigurationError):
    """Two grids that must align do not."""


class InsufficientSweepPointsError(ConfigurationError):
    """A sweep was requested with too few parameter values."""


# ── Numeric exceptions ──────────────────────────────────────────────

class NumericError(GameLabError):
    """A coefficient or payoff evaluated to a non-finite number."""

    def __init__(self, message: str, node: int | tuple | None = None):
        super().__init__(message)
        self.node = node


class SolverError(GameLabError):
    """The nonlinear solve did not converge."""

    def __init__(
        self, message: str, node: int | tuple | None = None, residual: float | None = None
    ):
        super().__init__(message)
        self.node = node
        self.residual = residual


class DegenerateFitError(GameLabError):
    """Every sweep statistic sits below the noise floor; no slope can be fitted."""


# ── Invariant exceptions ────────────────────────────────────────────

class InvariantViolationError(GameLabError):
    """A data invariant (unit directions, nonnegative atoms, jump bookkeeping) broke."""


class DominanceViolationError(InvariantViolationError):
    """A value field fell below the obstacle by more than the allowed band."""

    def __init__(self, message: str, node: int | None = None, gap: float | None = None):
        super().__init__(message)
        self.node = node
        self.gap = gap


class ControlClassError(GameLabError):
    """A control lies outside the restricted admissible class."""

    def __init__(self, message: str, observed: float | None = None, bound: float | None = None):
        super().__init__(message)
        self.observed = observed
        self.bound = bound


# ── Artifact exceptions ─────────────────────────────────────────────

class ArtifactError(GameLabError):
    """Output directory is empty, malformed or inconsistent."""
