"""
Pydantic Models for relhartree.

Immutable (frozen) models for physical parameters, grids, solver options,
sweep configuration, and the report types produced by the harness.
"""

import math
from enum import Enum
from pathlib import Path

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from .radial_core import INFINITY, RadialGrid

# =============================================================================
# Problem definition
# =============================================================================


class ProblemKind(str, Enum):
    """Which variational problem a ground state solves."""

    ACTION = "action"  # minimize J on the Nehari manifold, frequency lambda given
    ENERGY = "energy"  # minimize E on the unit L^2 sphere, multiplier omega found


class PhysicalParams(BaseModel):
    """
    Mass, frequency and speed of light (hbar = 1).

    ``c = INFINITY`` selects the non-relativistic operator -Laplace/(2m).
    ``lam`` is only required for the action problem.
    """

    model_config = ConfigDict(frozen=True, populate_by_name=True, ser_json_inf_nan="strings")

    m: float = Field(1.0, description="Particle mass", gt=0)
    lam: float | None = Field(
        None, alias="lambda", description="Frequency of the action problem", gt=0
    )
    c: float = Field(INFINITY, description="Speed of light, or inf for the limit", gt=0)

    @field_validator("m", "lam")
    @classmethod
    def _finite(cls, value: float | None) -> float | None:
        if value is not None and not math.isfinite(value):
            raise ValueError("must be finite")
        return value

    @field_validator("c")
    @classmethod
    def _not_nan(cls, value: float) -> float:
        if math.isnan(value):
            raise ValueError("must be a number or inf")
        return value

    @property
    def is_relativistic(self) -> bool:
        """True for a finite speed of light."""
        return math.isfinite(self.c)

    def with_c(self, c: float) -> "PhysicalParams":
        return self.model_copy(update={"c": c})

    def limit(self) -> "PhysicalParams":
        """Same mass and frequency at c = INFINITY."""
        return self.with_c(INFINITY)


class GridSpec(BaseModel):
    """Serializable description of a RadialGrid."""

    model_config = ConfigDict(frozen=True)

    n: int = Field(4096, description="Interior node count", ge=1)
    radius: float = Field(40.0, description="Domain radius", gt=0)

    def to_grid(self) -> RadialGrid:
        return RadialGrid(n=self.n, radius=self.radius)

    @classmethod
    def of(cls, grid: RadialGrid) -> "GridSpec":
        return cls(n=grid.n, radius=grid.radius)


class SolverOptions(BaseModel):
    """Tolerances and knobs of the ground-state iterations."""

    model_config = ConfigDict(frozen=True)

    tol: float = Field(1e-10, description="L^2 step tolerance between iterates", gt=0)
    residual_tol: float = Field(1e-9, description="L^2 equation-residual tolerance", gt=0)
    max_iterations: int = Field(100_000, description="Iteration budget", ge=1)
    damping: float = Field(0.5, description="Picard damping theta", gt=0, le=1)
    stabilization_factor: float = Field(
        2.0, description="Energy-flow shift sigma as a multiple of the multiplier", gt=0
    )
    stabilization_floor: float = Field(0.1, description="Lower bound on sigma", gt=0)
    initial_width: float | None = Field(
        None, description="Width of the initial Gaussian (default 2/m)", gt=0
    )
    divergence_factor: float = Field(
        1e3, description="Allowed growth of the H^1/2 norm before aborting", gt=1
    )
    c_min: float = Field(5.0, description="Smallest admissible c for the energy problem", gt=0)
    energy_drift_tol: float = Field(
        1e-12, description="Tolerated per-step energy increase along the flow", ge=0
    )
    log_every: int = Field(1000, description="Debug log interval in iterations", ge=1)


# =============================================================================
# Functional values
# =============================================================================


class FunctionalKind(str, Enum):
    ACTION = "action"
    ENERGY = "energy"
    HARTREE = "hartree"
    NEHARI_RESIDUAL = "nehari_residual"


class FunctionalValue(BaseModel):
    """A named scalar functional evaluated on a profile."""

    model_config = ConfigDict(frozen=True)

    kind: FunctionalKind
    value: float


# =============================================================================
# Sweeps and reports
# =============================================================================


def geometric_c_values(start: float, stop: float, ratio: float) -> list[float]:
    """Geometric list start, start*ratio, ... not exceeding stop (with slack)."""
    if not (0 < start <= stop) or ratio <= 1:
        raise ValueError("need 0 < start <= stop and ratio > 1")
    count = int(math.floor(math.log(stop / start) / math.log(ratio) + 1e-9)) + 1
    return [start * ratio**i for i in range(count)]


class SweepConfig(BaseModel):
    """What a rate study solves and records."""

    model_config = ConfigDict(frozen=True)

    kind: ProblemKind = Field(ProblemKind.ENERGY, description="Problem kind")
    c_start: float = Field(10.0, description="Smallest c", gt=0)
    c_stop: float = Field(160.0, description="Largest c", gt=0)
    c_ratio: float = Field(math.sqrt(2.0), description="Geometric ratio of the c grid", gt=1)
    c_list: tuple[float, ...] | None = Field(
        None, description="Explicit c values (overrides start/stop/ratio)"
    )
    order: int = Field(2, description="Number of corrections in the series", ge=0)
    sobolev: tuple[float, ...] = Field((0.0, 1.0, 2.0), description="Reported Sobolev indices")
    warm_start: bool = Field(True, description="Start each solve from the truncated series")
    zero_corrections: tuple[int, ...] = Field(
        (), description="Correction indices replaced by zero (negative control)"
    )
    max_workers: int = Field(1, description="Concurrent per-c solves", ge=1)
    noise_factor: float = Field(
        100.0, description="Field residuals below noise_factor*tol are excluded", gt=0
    )
    scalar_noise_floor: float = Field(
        1e-12, description="Scalar gaps below this are excluded from fits", gt=0
    )

    @field_validator("sobolev")
    @classmethod
    def _non_negative(cls, value: tuple[float, ...]) -> tuple[float, ...]:
        if not value or any(s < 0 for s in value):
            raise ValueError("Sobolev indices must be a non-empty list of values >= 0")
        return value

    @model_validator(mode="after")
    def _check_c_grid(self) -> "SweepConfig":
        values = self.c_values
        if not values:
            raise ValueError("at least one c value is required")
        if any(not math.isfinite(c) or c <= 0 for c in values):
            raise ValueError("c values must be finite and positive")
        if any(b <= a for a, b in zip(values, values[1:], strict=False)):
            raise ValueError("c values must be strictly increasing")
        if any(k < 1 or k > self.order for k in self.zero_corrections):
            raise ValueError("zero_corrections must name corrections 1..order")
        return self

    @property
    def c_values(self) -> list[float]:
        if self.c_list is not None:
            return list(self.c_list)
        return geometric_c_values(self.c_start, self.c_stop, self.c_ratio)


class ExpectationKind(str, Enum):
    SLOPE = "slope"  # log-log slope of a quantity against c
    LIMIT = "limit"  # value of a quantity at a given c
    MONOTONE = "monotone"  # non-increasing in c above the noise floor


class Expectation(BaseModel):
    """One acceptance criterion checked against a report."""

    model_config = ConfigDict(frozen=True)

    name: str = Field(..., description="Human-readable label")
    quantity: str = Field(..., description="Report quantity key")
    kind: ExpectationKind = Field(ExpectationKind.SLOPE)
    expected: float = Field(..., description="Expected slope or limit value")
    tolerance: float = Field(
        ..., description="Absolute (slope), relative (limit) or relative rise (monotone)", gt=0
    )
    at_c: float | None = Field(None, description="c at which a limit is read (default last)")


class Verdict(BaseModel):
    """Outcome of one expectation or acceptance check."""

    model_config = ConfigDict(frozen=True, ser_json_inf_nan="strings")

    name: str
    passed: bool
    observed: float | None = None
    expected: float | None = None
    tolerance: float | None = None
    note: str = ""


class SlopeFit(BaseModel):
    """Least-squares line through (log c, log quantity)."""

    model_config = ConfigDict(frozen=True, ser_json_inf_nan="strings")

    quantity: str
    slope: float | None
    intercept: float | None
    r_squared: float | None
    points: int = Field(..., description="Points used in the fit", ge=0)
    excluded: int = Field(0, description="Points dropped below the noise floor", ge=0)


class SweepRecord(BaseModel):
    """Everything recorded for one value of c."""

    model_config = ConfigDict(frozen=True, ser_json_inf_nan="strings")

    c: float
    level: float
    multiplier: float
    iterations: int
    quantities: dict[str, float]


class SweepReport(BaseModel):
    """Deterministic result of a rate study."""

    model_config = ConfigDict(frozen=True, ser_json_inf_nan="strings")

    kind: ProblemKind
    params: PhysicalParams
    grid: GridSpec
    order: int
    sobolev: tuple[float, ...]
    zero_corrections: tuple[int, ...] = ()
    base_level: float
    base_multiplier: float
    laplacian_norm_sq: float = Field(..., description="||Laplace of the limit profile||^2")
    field_noise_floor: float
    scalar_noise_floor: float
    records: tuple[SweepRecord, ...]
    fits: tuple[SlopeFit, ...] = ()
    code_version: str

    @property
    def c_values(self) -> list[float]:
        return [record.c for record in self.records]

    def series(self, quantity: str) -> tuple[list[float], list[float]]:
        """(c, value) pairs of one quantity, in c order."""
        xs: list[float] = []
        ys: list[float] = []
        for record in self.records:
            if quantity in record.quantities:
                xs.append(record.c)
                ys.append(record.quantities[quantity])
        return xs, ys

    def fit(self, quantity: str) -> SlopeFit | None:
        return next((f for f in self.fits if f.quantity == quantity), None)


# =============================================================================
# Run configuration
# =============================================================================


class RunConfig(BaseModel):
    """Fully validated command-line run; built before any computation."""

    model_config = ConfigDict(frozen=True)

    kind: ProblemKind = Field(ProblemKind.ENERGY)
    params: PhysicalParams = Field(default_factory=PhysicalParams)
    grid: GridSpec = Field(default_factory=GridSpec)
    solver: SolverOptions = Field(default_factory=SolverOptions)
    sweep: SweepConfig = Field(default_factory=SweepConfig)
    output: Path = Field(Path("relhartree-out"), description="Output file or directory")
    plot: bool = Field(False, description="Emit SVG log-log plots")
    use_cache: bool = Field(True, description="Reuse cached limit ground states")

    @model_validator(mode="after")
    def _check_frequency(self) -> "RunConfig":
        if self.kind is ProblemKind.ACTION and self.params.lam is None:
            raise ValueError("the action problem needs lambda")
        return self
