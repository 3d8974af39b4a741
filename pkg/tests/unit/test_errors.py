"""
Unit tests for relhartree exceptions.

Tests the custom exception hierarchy, error codes and messages.
"""

import pytest

pytestmark = pytest.mark.unit


class TestRelHartreeError:
    """Tests for the base RelHartreeError exception."""

    def test_is_exception(self) -> None:
        """RelHartreeError should be an Exception subclass."""
        from relhartree.errors import RelHartreeError

        assert issubclass(RelHartreeError, Exception)

    def test_has_message_and_code(self) -> None:
        """RelHartreeError should store message and error_code."""
        from relhartree.errors import RelHartreeError

        error = RelHartreeError("Test error", error_code="TEST_ERROR")
        assert error.message == "Test error"
        assert error.error_code == "TEST_ERROR"
        assert str(error) == "Test error"

    def test_default_code(self) -> None:
        """RelHartreeError should have a default error_code."""
        from relhartree.errors import RelHartreeError

        assert RelHartreeError("Test error").error_code == "UNKNOWN_ERROR"


class TestSubclassCodes:
    """Every subclass carries a stable code and derives from the base."""

    @pytest.mark.parametrize(
        ("factory", "code"),
        [
            (lambda e: e.InvalidParameterError("bad", "s"), "INVALID_PARAMETER"),
            (lambda e: e.GridMismatchError(), "GRID_MISMATCH"),
            (lambda e: e.NonFiniteFieldError(3), "NON_FINITE_FIELD"),
            (lambda e: e.ConvergenceError("energy", 10, 1e-3), "NOT_CONVERGED"),
            (lambda e: e.DegenerateIterateError(4), "DEGENERATE_ITERATE"),
            (lambda e: e.DivergenceError(7, 1e4), "DIVERGED"),
            (lambda e: e.SubcriticalCollapseError(2.0, "test"), "SUBCRITICAL_COLLAPSE"),
            (lambda e: e.LinearSolveError(100, 1e-4), "LINEAR_SOLVE_FAILED"),
            (lambda e: e.InvalidBaseStateError(1e-3, 1e-6), "INVALID_BASE_STATE"),
            (lambda e: e.SeriesError("no g_3"), "SERIES_ERROR"),
            (lambda e: e.FitError("two points"), "FIT_ERROR"),
            (lambda e: e.ProfileIntegrityError("w.profile"), "HASH_MISMATCH"),
            (lambda e: e.ProfileFormatError("w.profile", "empty"), "PROFILE_FORMAT"),
            (lambda e: e.ConfigError("bad", "tol"), "INVALID_CONFIG"),
        ],
    )
    def test_error_code(self, factory, code: str) -> None:
        """Each exception reports its documented code."""
        from relhartree import errors

        error = factory(errors)
        assert isinstance(error, errors.RelHartreeError)
        assert error.error_code == code


class TestStructuredAttributes:
    """Exceptions keep the values that caused them."""

    def test_invalid_parameter_stores_field(self) -> None:
        """InvalidParameterError should name the offending field."""
        from relhartree.errors import InvalidParameterError

        assert InvalidParameterError("negative", "rho").field == "rho"

    def test_subcritical_collapse_names_c(self) -> None:
        """SubcriticalCollapseError should identify c as subcritical."""
        from relhartree.errors import SubcriticalCollapseError

        error = SubcriticalCollapseError(2.5, "below c_min")
        assert error.c == 2.5
        assert "2.5" in str(error)
        assert "subcritical" in str(error)

    def test_sweep_error_wraps_cause(self) -> None:
        """SweepError should identify the failing c and keep the cause."""
        from relhartree.errors import ConvergenceError, SweepError

        cause = ConvergenceError("energy", 50, 1e-4)
        error = SweepError(14.0, cause)
        assert error.c == 14.0
        assert error.cause is cause
        assert "14" in str(error)
        assert error.error_code == "SWEEP_FAILED"

    def test_convergence_error_details(self) -> None:
        """ConvergenceError should store kind, iterations and residual."""
        from relhartree.errors import ConvergenceError

        error = ConvergenceError("action", 1000, 3e-7)
        assert error.kind == "action"
        assert error.iterations == 1000
        assert error.residual == 3e-7

    def test_profile_errors_store_path(self) -> None:
        """Profile errors should mention the file."""
        from relhartree.errors import ProfileFormatError, ProfileIntegrityError

        assert "w.profile" in str(ProfileIntegrityError("w.profile"))
        error = ProfileFormatError("w.profile", "missing hash footer")
        assert error.path == "w.profile"
        assert "missing hash footer" in str(error)
