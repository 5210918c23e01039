"""Tests for the unified exception hierarchy."""

from gamelab.exceptions import (
    ArtifactError,
    ConfigurationError,
    ControlClassError,
    DegenerateFitError,
    DominanceViolationError,
    GameLabError,
    GridMismatchError,
    InsufficientSweepPointsError,
    InvariantViolationError,
    NumericError,
    SchemaError,
    SolverError,
)


class TestExceptionHierarchy:
    """All exceptions should inherit from GameLabError."""

    def test_configuration_errors(self):
        assert issubclass(ConfigurationError, GameLabError)
        assert issubclass(SchemaError, ConfigurationError)
        assert issubclass(GridMismatchError, ConfigurationError)
        assert issubclass(InsufficientSweepPointsError, ConfigurationError)

    def test_numeric_errors(self):
        assert issubclass(NumericError, GameLabError)
        assert issubclass(SolverError, GameLabError)
        assert issubclass(DegenerateFitError, GameLabError)

    def test_invariant_errors(self):
        assert issubclass(InvariantViolationError, GameLabError)
        assert issubclass(DominanceViolationError, InvariantViolationError)
        assert issubclass(ControlClassError, GameLabError)

    def test_artifact_errors(self):
        assert issubclass(ArtifactError, GameLabError)


class TestExceptionAttributes:
    """Custom attributes on exception subclasses."""

    def test_field_path_prefixes_message(self):
        exc = SchemaError("expected a number", field_path="simulation.gammas[2]")
        assert exc.field_path == "simulation.gammas[2]"
        assert str(exc) == "simulation.gammas[2]: expected a number"

    def test_field_path_optional(self):
        exc = ConfigurationError("bad grid")
        assert exc.field_path is None
        assert str(exc) == "bad grid"

    def test_solver_error_carries_node_and_residual(self):
        exc = SolverError("no convergence", node=(3, 17), residual=0.5)
        assert exc.node == (3, 17)
        assert exc.residual == 0.5

    def test_dominance_violation_carries_gap(self):
        exc = DominanceViolationError("below obstacle", node=4, gap=-0.2)
        assert exc.node == 4
        assert exc.gap == -0.2

    def test_control_class_error_carries_bound(self):
        exc = ControlClassError("too much control", observed=5.0, bound=2.0)
        assert exc.observed == 5.0
        assert exc.bound == 2.0
