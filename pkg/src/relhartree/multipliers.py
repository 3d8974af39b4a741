"""
Radial Fourier multipliers.

Symbols are functions of rho = |xi|. With x = rho^2 / (m c)^2:

    P_c      = m c^2 (sqrt(1 + x) - 1) = rho^2 / (m (sqrt(1 + x) + 1))
    P_inf    = rho^2 / (2 m)
    P_inf,n  = (-1)^n alpha_{n+1} rho^(2n+2) / m^(2n+1)
    P_c,n    = P_c - sum_{k=1..n} (-1)^(k-1) alpha_k rho^(2k) / (m^(2k-1) c^(2k-2))
    T_c      = P_c / sqrt(1 + x)
    FracLap  = rho^(2p)
    Resolvent(base, mu) = 1 / (base + mu)

so that P_c = sum_n c^(-2n) P_inf,n and P_c,n+1 = P_c,n - c^(-2n) P_inf,n.
"""

import math
from collections.abc import Sequence
from enum import Enum
from fractions import Fraction
from functools import lru_cache
try:
    from typing import Self
except ImportError:  # Python < 3.11
    from typing_extensions import Self

import numpy as np
from numpy.typing import ArrayLike
from pydantic import BaseModel, ConfigDict, Field, model_validator

from .errors import FitError, InvalidParameterError
from .fitting import log_log_fit
from .models import PhysicalParams
from .radial_core import (
    FloatArray,
    RadialField,
    RadialGrid,
    SpectralField,
    inverse_sine_transform,
    l2_norm,
    sine_transform,
)

# Below this x the remainder is summed from its Taylor tail
_TAIL_SWITCH = 0.5
_TAIL_TERMS = 64


class SymbolKind(str, Enum):
    PC = "Pc"
    PINF = "Pinf"
    PINF_N = "PinfN"
    PC_N = "PcN"
    TC = "Tc"
    FRAC_LAP = "FracLap"
    RESOLVENT = "Resolvent"


_NEEDS_PARAMS = {
    SymbolKind.PC,
    SymbolKind.PINF,
    SymbolKind.PINF_N,
    SymbolKind.PC_N,
    SymbolKind.TC,
}


class MultiplierSpec(BaseModel):
    """A named radial symbol with its parameters; hashable, so tables cache on it."""

    model_config = ConfigDict(frozen=True)

    kind: SymbolKind
    params: PhysicalParams | None = None
    n: int | None = Field(None, description="Expansion index (PinfN, PcN)", ge=0)
    power: float | None = Field(None, description="Power p of (-Laplace)^p", ge=0)
    base: "MultiplierSpec | None" = None
    shift: float | None = Field(None, description="Resolvent shift mu")

    @model_validator(mode="after")
    def _check(self) -> Self:
        kind = self.kind
        if kind in _NEEDS_PARAMS and self.params is None:
            raise InvalidParameterError(f"{kind.value} needs physical parameters", "params")
        if kind in (SymbolKind.PINF_N, SymbolKind.PC_N) and self.n is None:
            raise InvalidParameterError(f"{kind.value} needs an expansion index", "n")
        if kind is SymbolKind.PC_N:
            assert self.params is not None and self.n is not None
            if not self.params.is_relativistic:
                raise InvalidParameterError("PcN is undefined at c = INFINITY", "c")
            if self.n < 1:
                raise InvalidParameterError("PcN needs n >= 1", "n")
        if kind is SymbolKind.FRAC_LAP and self.power is None:
            raise InvalidParameterError("FracLap needs a power", "power")
        if kind is SymbolKind.RESOLVENT:
            if self.base is None:
                raise InvalidParameterError("Resolvent needs a base symbol", "base")
            if self.shift is None or not self.shift > 0:
                raise InvalidParameterError(
                    f"Resolvent shift must be strictly positive, got {self.shift}", "shift"
                )
        return self

    # Constructors ------------------------------------------------------------

    @classmethod
    def pc(cls, params: PhysicalParams) -> "MultiplierSpec":
        return cls(kind=SymbolKind.PC, params=params)

    @classmethod
    def pinf(cls, params: PhysicalParams) -> "MultiplierSpec":
        return cls(kind=SymbolKind.PINF, params=params)

    @classmethod
    def pinf_n(cls, n: int, params: PhysicalParams) -> "MultiplierSpec":
        return cls(kind=SymbolKind.PINF_N, params=params, n=n)

    @classmethod
    def pc_n(cls, n: int, params: PhysicalParams) -> "MultiplierSpec":
        return cls(kind=SymbolKind.PC_N, params=params, n=n)

    @classmethod
    def tc(cls, params: PhysicalParams) -> "MultiplierSpec":
        return cls(kind=SymbolKind.TC, params=params)

    @classmethod
    def frac_lap(cls, power: float) -> "MultiplierSpec":
        return cls(kind=SymbolKind.FRAC_LAP, power=power)

    @classmethod
    def resolvent(cls, base: "MultiplierSpec", shift: float) -> "MultiplierSpec":
        return cls(kind=SymbolKind.RESOLVENT, base=base, shift=shift)

    @classmethod
    def kinetic(cls, params: PhysicalParams) -> "MultiplierSpec":
        """P_c for finite c, P_inf at the limit."""
        return cls.pc(params) if params.is_relativistic else cls.pinf(params)


MultiplierSpec.model_rebuild()


# =============================================================================
# Symbol evaluation
# =============================================================================


@lru_cache(maxsize=256)
def _alpha_exact(k: int) -> Fraction:
    if k == 1:
        return Fraction(1, 2)
    previous = k - 1
    return _alpha_exact(previous) * Fraction(2 * previous - 1, 2 * previous + 2)


def alpha(k: int) -> float:
    """Taylor coefficient alpha_k = (2k-2)! / (k! (k-1)! 2^(2k-1)) of sqrt(1+t) - 1."""
    if k < 1:
        raise InvalidParameterError(f"alpha is defined for k >= 1, got {k}", "k")
    return float(_alpha_exact(k))


def _pc(rho: FloatArray, m: float, c: float) -> FloatArray:
    x = (rho / (m * c)) ** 2
    return rho * rho / (m * (np.sqrt(1.0 + x) + 1.0))


def _pinf_n(rho: FloatArray, n: int, m: float) -> FloatArray:
    sign = -1.0 if n % 2 else 1.0
    return sign * alpha(n + 1) * rho ** (2 * n + 2) / m ** (2 * n + 1)


def _neumaier_sum(terms: Sequence[FloatArray]) -> FloatArray:
    total = np.zeros_like(terms[0])
    compensation = np.zeros_like(terms[0])
    for term in terms:
        t = total + term
        big = np.abs(total) >= np.abs(term)
        compensation += np.where(big, (total - t) + term, (term - t) + total)
        total = t
    return total + compensation


def _pc_n(rho: FloatArray, n: int, m: float, c: float) -> FloatArray:
    rest = m * c * c
    x = (rho / (m * c)) ** 2
    out = np.empty_like(rho)

    small = x < _TAIL_SWITCH
    if np.any(small):
        xs = x[small]
        # Alternating tail sum_{k>n} (-1)^(k-1) alpha_k x^k, smallest terms first
        tail = [
            (1.0 if (k - 1) % 2 == 0 else -1.0) * alpha(k) * xs**k
            for k in range(n + _TAIL_TERMS, n, -1)
        ]
        out[small] = rest * _neumaier_sum(tail)

    large = ~small
    if np.any(large):
        xl = x[large]
        terms = [rest * (np.sqrt(1.0 + xl) - 1.0)]
        terms += [
            -(1.0 if (k - 1) % 2 == 0 else -1.0) * rest * alpha(k) * xl**k
            for k in range(1, n + 1)
        ]
        out[large] = _neumaier_sum(terms)
    return out


def _symbol(spec: MultiplierSpec, rho: FloatArray) -> FloatArray:
    kind = spec.kind
    if kind is SymbolKind.FRAC_LAP:
        assert spec.power is not None
        return rho ** (2.0 * spec.power)
    if kind is SymbolKind.RESOLVENT:
        assert spec.base is not None and spec.shift is not None
        return 1.0 / (_symbol(spec.base, rho) + spec.shift)

    assert spec.params is not None
    m, c = spec.params.m, spec.params.c
    if kind is SymbolKind.PINF:
        return rho * rho / (2.0 * m)
    if kind is SymbolKind.PC:
        return _pc(rho, m, c)
    if kind is SymbolKind.TC:
        return _pc(rho, m, c) / np.sqrt(1.0 + (rho / (m * c)) ** 2)
    if kind is SymbolKind.PINF_N:
        assert spec.n is not None
        return _pinf_n(rho, spec.n, m)
    assert spec.n is not None
    return _pc_n(rho, spec.n, m, c)


def eval_symbol(spec: MultiplierSpec, rho: ArrayLike) -> FloatArray:
    """Symbol value(s) at rho >= 0; scalar input gives a 0-d array."""
    values = np.asarray(rho, dtype=np.float64)
    if np.any(values < 0):
        raise InvalidParameterError("Symbols are evaluated at rho >= 0", "rho")
    flat = np.atleast_1d(values).ravel()
    return _symbol(spec, flat).reshape(values.shape)


@lru_cache(maxsize=512)
def symbol_table(spec: MultiplierSpec, grid: RadialGrid) -> FloatArray:
    """Symbol sampled at the grid frequencies (read-only, cached)."""
    table = _symbol(spec, np.array(grid.frequencies))
    table.flags.writeable = False
    return table


def apply_multiplier(spec: MultiplierSpec, u: RadialField) -> RadialField:
    """Transform, scale each coefficient by the symbol, transform back."""
    spectrum = sine_transform(u)
    scaled = SpectralField(u.grid, spectrum.coeffs * symbol_table(spec, u.grid))
    return inverse_sine_transform(scaled)


def quadratic_form(spec: MultiplierSpec, u: RadialField) -> float:
    """<Op u, u> summed on the spectral side."""
    coeffs = sine_transform(u).coeffs
    return u.grid.measure * float(np.dot(symbol_table(spec, u.grid) * coeffs, coeffs))


def remainder_rate(
    n: int, f: RadialField, c_list: Sequence[float], m: float = 1.0
) -> float:
    """Log-log slope of ||P_c,n f||_L2 against c (expected -2n for smooth f)."""
    if len(c_list) < 2:
        raise InvalidParameterError("remainder_rate needs at least two c values", "c_list")
    norms = [
        l2_norm(apply_multiplier(MultiplierSpec.pc_n(n, PhysicalParams(m=m, c=c)), f))
        for c in c_list
    ]
    if any(value <= 0 for value in norms):
        raise FitError("Remainder norms vanish; the test field carries no spectral mass")
    slope, _, _ = log_log_fit(list(c_list), norms, min_points=2)
    return slope

