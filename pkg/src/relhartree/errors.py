"""
Custom Exceptions

Exception hierarchy for solver, expansion and harness failures with
meaningful messages and stable error codes for the command-line layer.
"""

from pathlib import Path


class RelHartreeError(Exception):
    """Base exception for all relhartree errors."""

    def __init__(self, message: str, error_code: str | None = None) -> None:
        super().__init__(message)
        self.message = message
        self.error_code = error_code or "UNKNOWN_ERROR"


# =============================================================================
# Input validation
# =============================================================================


class InvalidParameterError(RelHartreeError):
    """
    A numeric argument is outside its admissible range.

    Raised when:
    - a frequency, Sobolev index or symbol argument is negative
    - an expansion index is zero or negative
    - a remainder symbol is requested at the non-relativistic limit
    - a resolvent shift is not strictly positive
    """

    def __init__(self, message: str, field: str | None = None) -> None:
        super().__init__(message, error_code="INVALID_PARAMETER")
        self.field = field


class GridMismatchError(RelHartreeError):
    """
    Two fields (or a field and a stored profile) live on different grids.

    Raised when:
    - fields are combined arithmetically across grids
    - a loaded profile does not match the expected grid
    """

    def __init__(self, message: str = "Fields are defined on different radial grids") -> None:
        super().__init__(message, error_code="GRID_MISMATCH")


class NonFiniteFieldError(RelHartreeError):
    """A field or spectrum contains NaN or infinite samples."""

    def __init__(self, count: int) -> None:
        message = f"Field contains {count} non-finite sample(s)"
        super().__init__(message, error_code="NON_FINITE_FIELD")
        self.count = count


# =============================================================================
# Ground-state solvers
# =============================================================================


class ConvergenceError(RelHartreeError):
    """
    A fixed-point iteration did not meet its tolerances.

    Raised when:
    - the iteration budget is exhausted before step and residual tolerances hold
    """

    def __init__(self, kind: str, iterations: int, residual: float) -> None:
        message = (
            f"{kind} solve did not converge after {iterations} iterations "
            f"(equation residual {residual:.3e})"
        )
        super().__init__(message, error_code="NOT_CONVERGED")
        self.kind = kind
        self.iterations = iterations
        self.residual = residual


class DegenerateIterateError(RelHartreeError):
    """An iterate has vanishing Hartree energy or norm, so it cannot be rescaled."""

    def __init__(self, iteration: int) -> None:
        message = f"Degenerate iterate at iteration {iteration}: Hartree energy vanished"
        super().__init__(message, error_code="DEGENERATE_ITERATE")
        self.iteration = iteration


class DivergenceError(RelHartreeError):
    """The iterate norm grew beyond the divergence bound."""

    def __init__(self, iteration: int, growth: float) -> None:
        message = f"Iteration diverged at step {iteration} (norm growth {growth:.3e})"
        super().__init__(message, error_code="DIVERGED")
        self.iteration = iteration
        self.growth = growth


class SubcriticalCollapseError(RelHartreeError):
    """
    The energy problem appears unbounded below at this speed of light.

    Raised when:
    - c is below the configured lower bound c_min
    - the H^{1/2} norm of the normalized flow grows without bound
    """

    def __init__(self, c: float, detail: str) -> None:
        message = f"c = {c:g} is subcritical: {detail}"
        super().__init__(message, error_code="SUBCRITICAL_COLLAPSE")
        self.c = c


# =============================================================================
# Linearized operators and expansions
# =============================================================================


class LinearSolveError(RelHartreeError):
    """
    The Krylov solve stagnated or exhausted its iteration budget.

    Usually signals a grid that is too coarse or a base state that is
    not a true ground state.
    """

    def __init__(self, iterations: int, relative_residual: float) -> None:
        message = (
            f"Linearized solve failed after {iterations} iterations "
            f"(relative residual {relative_residual:.3e})"
        )
        super().__init__(message, error_code="LINEAR_SOLVE_FAILED")
        self.iterations = iterations
        self.relative_residual = relative_residual


class InvalidBaseStateError(RelHartreeError):
    """The base profile of a linearized operator does not solve its equation."""

    def __init__(self, residual: float, bound: float) -> None:
        message = f"Base state residual {residual:.3e} exceeds {bound:.1e}"
        super().__init__(message, error_code="INVALID_BASE_STATE")
        self.residual = residual


class SeriesError(RelHartreeError):
    """
    An expansion series was queried beyond what it holds.

    Raised when:
    - a truncation order exceeds the series order
    - a coefficient needs corrections that are not yet available
    """

    def __init__(self, message: str) -> None:
        super().__init__(message, error_code="SERIES_ERROR")


# =============================================================================
# Harness
# =============================================================================


class FitError(RelHartreeError):
    """A log-log fit was given too few or non-positive points."""

    def __init__(self, message: str) -> None:
        super().__init__(message, error_code="FIT_ERROR")


class SweepError(RelHartreeError):
    """A solve inside a sweep failed; identifies the offending c."""

    def __init__(self, c: float, cause: RelHartreeError) -> None:
        message = f"Sweep aborted at c = {c:g}: {cause.message}"
        super().__init__(message, error_code="SWEEP_FAILED")
        self.c = c
        self.cause = cause


# =============================================================================
# Persistence and configuration
# =============================================================================


class ProfileIntegrityError(RelHartreeError):
    """Stored content hash does not match the file contents."""

    def __init__(self, path: str | Path) -> None:
        message = f"Content hash mismatch in {path}"
        super().__init__(message, error_code="HASH_MISMATCH")
        self.path = path


class ProfileFormatError(RelHartreeError):
    """A profile or series file cannot be parsed."""

    def __init__(self, path: str | Path, detail: str) -> None:
        message = f"Malformed file {path}: {detail}"
        super().__init__(message, error_code="PROFILE_FORMAT")
        self.path = path


class ConfigError(RelHartreeError):
    """A run configuration failed validation; names the offending field."""

    def __init__(self, message: str, field: str | None = None) -> None:
        super().__init__(message, error_code="INVALID_CONFIG")
        self.field = field
