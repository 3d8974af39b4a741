"""
relhartree

Radial pseudo-spectral solver for pseudo-relativistic Hartree ground
states and the verification harness for their expansion in powers of
1/c^2 around the non-relativistic limit.

Public API:
- RadialGrid, RadialField: Radial discretization
- MultiplierSpec: Fourier symbols (P_c, P_inf, Taylor terms and remainders, T_c)
- solve_action, solve_energy: Ground-state solvers
- LinearizedOperator: Linearization around a limit ground state
- build_expansion, eval_series: c^-2 series
- sweep, verify_rates: Rate studies
- run_suite: Acceptance suites
- Models: PhysicalParams, GridSpec, SolverOptions, SweepConfig, SweepReport, ...
- Exceptions: RelHartreeError and subclasses
"""

# Exports: All public API
from .cache import GroundStateCache
from .errors import (
    ConfigError,
    ConvergenceError,
    DegenerateIterateError,
    DivergenceError,
    FitError,
    GridMismatchError,
    InvalidBaseStateError,
    InvalidParameterError,
    LinearSolveError,
    NonFiniteFieldError,
    ProfileFormatError,
    ProfileIntegrityError,
    RelHartreeError,
    SeriesError,
    SubcriticalCollapseError,
    SweepError,
)
from .expansion import (
    ExpansionSeries,
    build_action_expansion,
    build_energy_expansion,
    build_expansion,
    eval_scalar_series,
    eval_series,
    normalization_defects,
)
from .ground_state import (
    GroundStateResult,
    energy_bracket,
    multiplier_identity_residual,
    nehari_scale,
    pohozaev_residual,
    rescale_limit_state,
    solve,
    solve_action,
    solve_energy,
)
from .harness import default_expectations, fit_slope, sweep, verify_rates
from .hartree import action, coulomb_potential, energy, nonlinearity
from .linearized import LinearizedOperator, LinearSolve
from .models import (
    Expectation,
    GridSpec,
    PhysicalParams,
    ProblemKind,
    RunConfig,
    SlopeFit,
    SolverOptions,
    SweepConfig,
    SweepRecord,
    SweepReport,
    Verdict,
)
from .multipliers import MultiplierSpec, SymbolKind, alpha, apply_multiplier, eval_symbol
from .persistence import ProfileRecord, load_profile, load_series, save_profile, save_series
from .radial_core import INFINITY, RadialField, RadialGrid, h_s_norm, inner_product
from .verification import run_suite

__all__: list[str] = [
    # Discretization
    "INFINITY",
    "RadialGrid",
    "RadialField",
    "inner_product",
    "h_s_norm",
    # Symbols
    "MultiplierSpec",
    "SymbolKind",
    "alpha",
    "eval_symbol",
    "apply_multiplier",
    # Nonlinearity and functionals
    "coulomb_potential",
    "nonlinearity",
    "action",
    "energy",
    # Ground states
    "GroundStateResult",
    "solve",
    "solve_action",
    "solve_energy",
    "pohozaev_residual",
    "nehari_scale",
    "energy_bracket",
    "multiplier_identity_residual",
    "rescale_limit_state",
    "LinearizedOperator",
    "LinearSolve",
    # Expansion
    "ExpansionSeries",
    "build_expansion",
    "build_action_expansion",
    "build_energy_expansion",
    "eval_series",
    "eval_scalar_series",
    "normalization_defects",
    # Harness
    "sweep",
    "fit_slope",
    "verify_rates",
    "default_expectations",
    "run_suite",
    # Persistence
    "ProfileRecord",
    "save_profile",
    "load_profile",
    "save_series",
    "load_series",
    "GroundStateCache",
    # Models
    "ProblemKind",
    "PhysicalParams",
    "GridSpec",
    "SolverOptions",
    "SweepConfig",
    "RunConfig",
    "Expectation",
    "Verdict",
    "SlopeFit",
    "SweepRecord",
    "SweepReport",
    # Errors
    "RelHartreeError",
    "InvalidParameterError",
    "GridMismatchError",
    "NonFiniteFieldError",
    "ConvergenceError",
    "DegenerateIterateError",
    "DivergenceError",
    "SubcriticalCollapseError",
    "LinearSolveError",
    "InvalidBaseStateError",
    "SeriesError",
    "FitError",
    "SweepError",
    "ProfileIntegrityError",
    "ProfileFormatError",
    "ConfigError",
]
