"""
Radial Core

Uniform radial grid, immutable field containers, the sine-spectral
transform pair, quadrature, inner products and Sobolev norms.

A radial function u on R^3 is stored through its samples u(r_i) on the
interior nodes r_i = i*dr, i = 1..N, with dr = R/(N+1). The spectral
side holds the orthonormal type-I sine transform of v = r*u, indexed by
rho_j = j*pi/R. Since -Laplace(u) * r = -(r*u)'', every radial Fourier
multiplier acts diagonally on these coefficients. The orthonormal DST-I
is its own inverse, so

    ||u||^2 = 4*pi*dr * sum_i (r_i u_i)^2 = 4*pi*dr * sum_j s_j^2

holds exactly (trapezoidal quadrature with zero end values on the
physical side, Parseval on the spectral side).
"""

import math
from collections.abc import Callable
from dataclasses import dataclass, field
from functools import cached_property
from typing import Union

import numpy as np
from numpy.typing import ArrayLike, NDArray
from scipy import fft

from .errors import GridMismatchError, InvalidParameterError, NonFiniteFieldError

# Non-relativistic sentinel for the speed of light
INFINITY = math.inf

FloatArray = NDArray[np.float64]

# Columns evaluated per block when resampling a sine series
_RESAMPLE_CHUNK = 256


def _frozen_copy(values: ArrayLike, size: int) -> FloatArray:
    array = np.array(values, dtype=np.float64, copy=True)
    if array.shape != (size,):
        raise GridMismatchError(f"Expected {size} samples, got shape {array.shape}")
    bad = int(np.count_nonzero(~np.isfinite(array)))
    if bad:
        raise NonFiniteFieldError(bad)
    array.flags.writeable = False
    return array


# =============================================================================
# Grid
# =============================================================================


@dataclass(frozen=True)
class RadialGrid:
    """
    Uniform mesh on [0, R] with matched sine-spectral frequencies.

    r_0 = 0 and r_{N+1} = R are implicit Dirichlet nodes and never stored.
    Grids compare (and hash) by (n, radius), so they can key caches.
    """

    n: int
    radius: float

    def __post_init__(self) -> None:
        if self.n < 1:
            raise InvalidParameterError(f"Grid needs at least one node, got {self.n}", "n")
        if not (math.isfinite(self.radius) and self.radius > 0):
            raise InvalidParameterError(
                f"Grid radius must be positive, got {self.radius}", "radius"
            )

    @cached_property
    def dr(self) -> float:
        return self.radius / (self.n + 1)

    @cached_property
    def nodes(self) -> FloatArray:
        nodes = self.dr * np.arange(1, self.n + 1, dtype=np.float64)
        nodes.flags.writeable = False
        return nodes

    @cached_property
    def frequencies(self) -> FloatArray:
        rho = (math.pi / self.radius) * np.arange(1, self.n + 1, dtype=np.float64)
        rho.flags.writeable = False
        return rho

    @cached_property
    def measure(self) -> float:
        """Weight 4*pi*dr shared by the physical and spectral quadratures."""
        return 4.0 * math.pi * self.dr

    def refined(self, factor: int = 2, extend: int = 1) -> "RadialGrid":
        """Grid with spacing dr/factor and radius extend*R, nested in this one."""
        if factor < 1 or extend < 1:
            raise InvalidParameterError("Refinement factors must be positive integers")
        return RadialGrid(n=factor * extend * (self.n + 1) - 1, radius=extend * self.radius)


# =============================================================================
# Fields
# =============================================================================

Operand = Union["RadialField", float, int]


@dataclass(frozen=True, eq=False)
class RadialField:
    """
    Real radial profile sampled on the interior grid nodes.

    Values are copied on construction and stored read-only. Arithmetic
    between fields requires a shared grid; products are pointwise.
    """

    grid: RadialGrid
    values: FloatArray = field(repr=False)

    def __post_init__(self) -> None:
        object.__setattr__(self, "values", _frozen_copy(self.values, self.grid.n))

    @classmethod
    def zeros(cls, grid: RadialGrid) -> "RadialField":
        return cls(grid, np.zeros(grid.n))

    @classmethod
    def from_function(
        cls, grid: RadialGrid, function: Callable[[FloatArray], ArrayLike]
    ) -> "RadialField":
        """Sample a vectorized function of r on the grid nodes."""
        return cls(grid, np.asarray(function(grid.nodes), dtype=np.float64))

    def _other(self, other: Operand) -> FloatArray | float:
        if isinstance(other, RadialField):
            if other.grid != self.grid:
                raise GridMismatchError()
            return other.values
        return float(other)

    def __add__(self, other: Operand) -> "RadialField":
        return RadialField(self.grid, self.values + self._other(other))

    __radd__ = __add__

    def __sub__(self, other: Operand) -> "RadialField":
        return RadialField(self.grid, self.values - self._other(other))

    def __rsub__(self, other: Operand) -> "RadialField":
        return RadialField(self.grid, self._other(other) - self.values)

    def __mul__(self, other: Operand) -> "RadialField":
        return RadialField(self.grid, self.values * self._other(other))

    __rmul__ = __mul__

    def __truediv__(self, other: float) -> "RadialField":
        return RadialField(self.grid, self.values / float(other))

    def __neg__(self) -> "RadialField":
        return RadialField(self.grid, -self.values)

    def max_abs(self) -> float:
        return float(np.max(np.abs(self.values)))


@dataclass(frozen=True, eq=False)
class SpectralField:
    """Orthonormal DST-I coefficients of r*u, indexed by rho_j."""

    grid: RadialGrid
    coeffs: FloatArray = field(repr=False)

    def __post_init__(self) -> None:
        object.__setattr__(self, "coeffs", _frozen_copy(self.coeffs, self.grid.n))


def same_grid(*fields: RadialField) -> RadialGrid:
    """Return the common grid of the given fields, or raise."""
    grid = fields[0].grid
    for other in fields[1:]:
        if other.grid != grid:
            raise GridMismatchError()
    return grid


# =============================================================================
# Transform pair
# =============================================================================


def sine_transform(u: RadialField) -> SpectralField:
    """Orthonormal type-I sine transform of r*u(r)."""
    grid = u.grid
    return SpectralField(grid, fft.dst(grid.nodes * u.values, type=1, norm="ortho"))


def inverse_sine_transform(s: SpectralField) -> RadialField:
    grid = s.grid
    return RadialField(grid, fft.idst(s.coeffs, type=1, norm="ortho") / grid.nodes)


def field_from_coefficients(grid: RadialGrid, coeffs: ArrayLike) -> RadialField:
    """Shortcut for ``inverse_sine_transform(SpectralField(grid, coeffs))``."""
    return inverse_sine_transform(SpectralField(grid, np.asarray(coeffs, dtype=np.float64)))


# =============================================================================
# Quadrature, inner products and norms
# =============================================================================


def inner_product(u: RadialField, v: RadialField) -> float:
    """L^2(R^3) pairing 4*pi * int u v r^2 dr by trapezoidal quadrature."""
    grid = same_grid(u, v)
    r2 = grid.nodes * grid.nodes
    return grid.measure * float(np.dot(r2 * u.values, v.values))


def l2_norm(u: RadialField) -> float:
    return math.sqrt(max(inner_product(u, u), 0.0))


def h_s_norm(u: RadialField, s: float) -> float:
    """Sobolev norm ((1 + rho^2)^s |u_hat|^2 summed with the L^2 weights)^(1/2)."""
    if s < 0:
        raise InvalidParameterError(f"Sobolev index must be non-negative, got {s}", "s")
    grid = u.grid
    coeffs = sine_transform(u).coeffs
    weights = (1.0 + grid.frequencies**2) ** s
    return math.sqrt(grid.measure * float(np.dot(weights * coeffs, coeffs)))


def spectral_pairing(u: RadialField, v: RadialField, power: float) -> float:
    """<(-Laplace)^(power/2) u, (-Laplace)^(power/2) v> summed on the spectral side."""
    if power < 0:
        raise InvalidParameterError(f"Pairing power must be non-negative, got {power}", "power")
    grid = same_grid(u, v)
    weights = grid.frequencies ** (2.0 * power)
    return grid.measure * float(
        np.dot(weights * sine_transform(u).coeffs, sine_transform(v).coeffs)
    )


def spectral_filter(u: RadialField, floor: float = 1e-14) -> RadialField:
    """
    Zero the spectral tail beyond the last coefficient above floor*max|s|.

    Removes round-off noise before high powers of the Laplacian are applied.
    """
    coeffs = np.array(sine_transform(u).coeffs)
    peak = float(np.max(np.abs(coeffs))) if coeffs.size else 0.0
    if peak == 0.0:
        return u
    significant = np.flatnonzero(np.abs(coeffs) > floor * peak)
    coeffs[significant[-1] + 1 :] = 0.0
    return field_from_coefficients(u.grid, coeffs)


def spectral_tail(u: RadialField, fraction: float = 0.5) -> float:
    """Largest |coefficient| beyond fraction*N, relative to the largest overall."""
    coeffs = np.abs(sine_transform(u).coeffs)
    peak = float(np.max(coeffs))
    if peak == 0.0:
        return 0.0
    start = int(fraction * coeffs.size)
    return float(np.max(coeffs[start:])) / peak


# =============================================================================
# Grid transfer
# =============================================================================


def restrict(u: RadialField, coarse: RadialGrid) -> RadialField:
    """Sample a field at the nodes of a coarser grid nested in its own."""
    fine = u.grid
    ratio = coarse.dr / fine.dr
    step = round(ratio)
    if step < 1 or abs(ratio - step) > 1e-9 * ratio or coarse.radius > fine.radius * (1 + 1e-12):
        raise GridMismatchError(
            f"Grid (n={coarse.n}, R={coarse.radius}) is not nested in "
            f"(n={fine.n}, R={fine.radius})"
        )
    indices = step * np.arange(1, coarse.n + 1) - 1
    return RadialField(coarse, u.values[indices])


def evaluate_series(u: RadialField, points: ArrayLike) -> FloatArray:
    """
    Evaluate the sine-series interpolant of u at arbitrary radii.

    Points outside (0, R) evaluate to zero; r = 0 takes the regular limit.
    """
    grid = u.grid
    coeffs = sine_transform(u).coeffs
    r = np.asarray(points, dtype=np.float64)
    out = np.zeros_like(r)
    scale = math.sqrt(2.0 / (grid.n + 1))
    rho = grid.frequencies
    inside = np.flatnonzero((r >= 0.0) & (r < grid.radius))
    for start in range(0, inside.size, _RESAMPLE_CHUNK):
        block = inside[start : start + _RESAMPLE_CHUNK]
        rb = r[block]
        # sin(rho r)/r with its limit rho at r = 0
        kernel = np.where(
            rb[:, None] > 0.0,
            np.sin(np.outer(rb, rho)) / np.where(rb > 0.0, rb, 1.0)[:, None],
            rho[None, :],
        )
        out[block] = scale * (kernel @ coeffs)
    return out


def resample(u: RadialField, grid: RadialGrid, dilation: float = 1.0) -> RadialField:
    """Return x -> u(dilation * x) sampled on ``grid``."""
    if dilation <= 0:
        raise InvalidParameterError(f"Dilation must be positive, got {dilation}", "dilation")
    return RadialField(grid, evaluate_series(u, dilation * grid.nodes))


def gaussian(grid: RadialGrid, width: float = 1.0, amplitude: float = 1.0) -> RadialField:
    """amplitude * exp(-r^2 / (2 width^2))."""
    return RadialField.from_function(
        grid, lambda r: amplitude * np.exp(-(r * r) / (2.0 * width * width))
    )
