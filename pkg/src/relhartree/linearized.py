"""
Linearized operators around limit ground states.

    L h = (P_inf + freq) h - N1(base)[h]

with base = u_inf (freq = lambda) or w_inf (freq = omega_inf). L is
self-adjoint for the L^2(R^3) pairing. The Krylov solver works in the
weighted coordinates x = sqrt(4 pi dr) r u, where that pairing is the
Euclidean dot product, so MINRES sees a symmetric matrix.
"""

import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np
from scipy.sparse.linalg import LinearOperator, eigsh, minres

from .errors import InvalidBaseStateError, InvalidParameterError, LinearSolveError
from .ground_state import GroundStateResult, equation_residual
from .hartree import nonlinearity_d1
from .logger import logger
from .models import PhysicalParams
from .multipliers import MultiplierSpec, apply_multiplier, symbol_table
from .radial_core import FloatArray, RadialField, field_from_coefficients, l2_norm, sine_transform

BASE_RESIDUAL_BOUND = 1e-6


@dataclass(frozen=True, eq=False)
class LinearSolve:
    """Solution of L f = rhs with its MINRES bookkeeping."""

    solution: RadialField
    iterations: int
    relative_residual: float


@dataclass(frozen=True, eq=False)
class LinearizedOperator:
    """L_freq around ``base`` at c = INFINITY."""

    base: RadialField
    freq: float
    params: PhysicalParams
    max_iterations: int = 5000
    restarts: int = 5

    def __post_init__(self) -> None:
        if not self.freq > 0:
            raise InvalidParameterError(f"Frequency must be positive, got {self.freq}", "freq")
        if self.params.is_relativistic:
            raise InvalidParameterError("Linearized operators live at c = INFINITY", "c")

    @classmethod
    def from_ground_state(
        cls, result: GroundStateResult, bound: float = BASE_RESIDUAL_BOUND
    ) -> "LinearizedOperator":
        """Operator around a converged limit ground state (residual checked)."""
        residual = equation_residual(result.profile, result.params, result.multiplier)
        if not residual < bound:
            raise InvalidBaseStateError(residual, bound)
        return cls(base=result.profile, freq=result.multiplier, params=result.params)

    @cached_property
    def _pinf(self) -> MultiplierSpec:
        return MultiplierSpec.pinf(self.params)

    @cached_property
    def _weight(self) -> FloatArray:
        grid = self.base.grid
        return math.sqrt(grid.measure) * grid.nodes

    def apply(self, h: RadialField) -> RadialField:
        """(P_inf + freq) h - N1(base)[h]."""
        return apply_multiplier(self._pinf, h) + self.freq * h - nonlinearity_d1(self.base, h)

    # Weighted coordinates ----------------------------------------------------

    def _to_field(self, x: FloatArray) -> RadialField:
        return RadialField(self.base.grid, np.ravel(x) / self._weight)

    def _to_vector(self, u: RadialField) -> FloatArray:
        return self._weight * u.values

    def _matvec(self, x: FloatArray) -> FloatArray:
        return self._to_vector(self.apply(self._to_field(x)))

    def _precondition(self, x: FloatArray) -> FloatArray:
        u = self._to_field(x)
        table = symbol_table(self._pinf, u.grid)
        coeffs = sine_transform(u).coeffs / (table + self.freq)
        return self._to_vector(field_from_coefficients(u.grid, coeffs))

    def as_linear_operator(self) -> LinearOperator:
        n = self.base.grid.n
        return LinearOperator((n, n), matvec=self._matvec, dtype=np.float64)

    def preconditioner(self) -> LinearOperator:
        """Resolvent (P_inf + freq)^-1 in weighted coordinates (SPD)."""
        n = self.base.grid.n
        return LinearOperator((n, n), matvec=self._precondition, dtype=np.float64)

    # Solves ------------------------------------------------------------------

    def solve(self, rhs: RadialField, tol: float = 1e-10) -> RadialField:
        """
        Return f with ||L f - rhs||_L2 < tol ||rhs||_L2.

        Raises:
            LinearSolveError: the true residual stays above tol after all restarts
        """
        return self.solve_with_info(rhs, tol).solution

    def solve_with_info(self, rhs: RadialField, tol: float = 1e-10) -> LinearSolve:
        """
        Solve L f = rhs and report the MINRES iteration count.

        Preconditioned MINRES, restarted from its last iterate until the
        true residual meets the tolerance. With the resolvent preconditioner
        the count should barely move when the grid is refined.

        Raises:
            LinearSolveError: the true residual stays above tol after all restarts
        """
        rhs_norm = l2_norm(rhs)
        if rhs_norm == 0:
            return LinearSolve(RadialField.zeros(rhs.grid), 0, 0.0)
        operator = self.as_linear_operator()
        preconditioner = self.preconditioner()
        b = self._to_vector(rhs)

        x = np.zeros_like(b)
        relative = math.inf
        iterations = 0

        def count(_: FloatArray) -> None:
            nonlocal iterations
            iterations += 1

        for _ in range(self.restarts + 1):
            x, info = minres(
                operator,
                b,
                x0=x,
                rtol=0.1 * tol,
                maxiter=self.max_iterations,
                M=preconditioner,
                callback=count,
            )
            solution = self._to_field(x)
            relative = l2_norm(self.apply(solution) - rhs) / rhs_norm
            if relative < tol:
                logger.debug(
                    "Linearized solve done",
                    extra={"context": {"iterations": iterations, "relative_residual": relative}},
                )
                return LinearSolve(solution, iterations, relative)
            logger.debug(
                "MINRES restart",
                extra={"context": {"relative_residual": relative, "info": int(info)}},
            )
        logger.warning(
            "Linearized solve failed",
            extra={"context": {"relative_residual": relative, "freq": self.freq}},
        )
        raise LinearSolveError(iterations, relative)

    def nearest_eigenvalue(self, tol: float = 1e-8) -> float:
        """Eigenvalue of L closest to 0 on the radial sector (shift-invert Lanczos)."""
        n = self.base.grid.n
        inner_tol = max(1e-12, 0.01 * tol)

        def invert(x: FloatArray) -> FloatArray:
            return self._to_vector(self.solve(self._to_field(x), inner_tol))

        inverse = LinearOperator((n, n), matvec=invert, dtype=np.float64)
        values = eigsh(
            self.as_linear_operator(),
            k=1,
            sigma=0.0,
            which="LM",
            OPinv=inverse,
            tol=tol,
            return_eigenvectors=False,
        )
        return float(values[0])
