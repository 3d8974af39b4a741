"""
Asymptotic series in powers of c^-2.

Action:  u_c ~ f_0 + sum_j f_j c^(-2j),  f_0 = u_inf,
         L_lambda f_k = -sum_{j<k} P_inf,k-j f_j + T_k.
Energy:  w_c ~ g_0 + sum_j g_j c^(-2j),  g_0 = w_inf,
         e_c ~ e_inf + sum_j a_j c^(-2j),  omega_c ~ omega_inf + sum_j b_j c^(-2j),
         L_omega g_k = -sum_{j<k} P_inf,k-j g_j - sum_{j<k} b_{k-j} g_j + T_k.

a_k and b_k only involve g_0..g_{k-1}, so each step computes the
coefficients first and then solves for the correction.
"""

import math
from collections.abc import Sequence
from dataclasses import dataclass, replace
from functools import cache

from .errors import InvalidParameterError, SeriesError
from .ground_state import GroundStateResult
from .hartree import compositions, composition_term, limit_energy_derivative
from .linearized import LinearizedOperator
from .logger import logger
from .models import PhysicalParams, ProblemKind
from .multipliers import MultiplierSpec, alpha, apply_multiplier
from .radial_core import RadialField, inner_product, l2_norm, spectral_filter, spectral_tail

DEFAULT_ORDER = 3
SOLVE_TOL = 1e-10
# Relative size allowed for spectral coefficients in the upper half of the band
SMOOTHNESS_TOL = 1e-12


@dataclass(frozen=True)
class ExpansionSeries:
    """
    Limit ground state plus corrections.

    ``terms`` holds f_0..f_n (or g_0..g_n); ``a`` and ``b`` hold
    a_1..a_{n+1} and b_1..b_{n+1} for the energy kind.
    """

    kind: ProblemKind
    base: GroundStateResult
    terms: tuple[RadialField, ...]
    a: tuple[float, ...] = ()
    b: tuple[float, ...] = ()

    @property
    def order(self) -> int:
        return len(self.terms) - 1

    @property
    def corrections(self) -> tuple[RadialField, ...]:
        return self.terms[1:]

    @property
    def params(self) -> PhysicalParams:
        return self.base.params

    @property
    def frequency(self) -> float:
        return self.base.multiplier

    def operator(self) -> LinearizedOperator:
        return LinearizedOperator(
            base=self.terms[0], freq=self.base.multiplier, params=self.base.params
        )

    def with_zeroed(self, indices: Sequence[int]) -> "ExpansionSeries":
        """Copy with the listed corrections replaced by zero fields."""
        for index in indices:
            if not 1 <= index <= self.order:
                raise SeriesError(f"No correction {index} in a series of order {self.order}")
        zero = RadialField.zeros(self.terms[0].grid)
        terms = tuple(zero if i in indices else t for i, t in enumerate(self.terms))
        return replace(self, terms=terms)


def _check_base(base: GroundStateResult, kind: ProblemKind) -> None:
    if base.kind is not kind:
        raise InvalidParameterError(f"Expected a {kind.value} ground state", "kind")
    if base.params.is_relativistic:
        raise InvalidParameterError("Expansions start from the c = INFINITY ground state", "c")


def _taylor_sum(terms: Sequence[RadialField], k: int, params: PhysicalParams) -> RadialField:
    """sum_{j<k} P_inf,k-j f_j."""
    total = RadialField.zeros(terms[0].grid)
    for j in range(k):
        total = total + apply_multiplier(MultiplierSpec.pinf_n(k - j, params), terms[j])
    return total


def action_rhs(terms: Sequence[RadialField], k: int, params: PhysicalParams) -> RadialField:
    """Right-hand side of L_lambda f_k."""
    return composition_term(terms, k) - _taylor_sum(terms, k, params)


def energy_rhs(
    terms: Sequence[RadialField], k: int, b: Sequence[float], params: PhysicalParams
) -> RadialField:
    """Right-hand side of L_omega g_k; b holds b_1..b_k."""
    if len(b) < k:
        raise SeriesError(f"g_{k} needs b_1..b_{k}, have {len(b)}")
    shift = RadialField.zeros(terms[0].grid)
    for j in range(k):
        shift = shift + b[k - j - 1] * terms[j]
    return composition_term(terms, k) - _taylor_sum(terms, k, params) - shift


def _smooth_correction(correction: RadialField, name: str, k: int) -> RadialField:
    """Filter round-off from a solved correction and flag a heavy spectral tail."""
    filtered = spectral_filter(correction)
    tail = spectral_tail(filtered)
    if tail > SMOOTHNESS_TOL:
        logger.warning(
            "Correction is not resolved on this grid",
            extra={
                "context": {"correction": f"{name}_{k}", "tail": tail, "bound": SMOOTHNESS_TOL}
            },
        )
    return filtered


def build_action_expansion(
    base: GroundStateResult, n: int = DEFAULT_ORDER, tol: float = SOLVE_TOL
) -> ExpansionSeries:
    """Corrections f_1..f_n around the limit action ground state."""
    _check_base(base, ProblemKind.ACTION)
    if n < 0:
        raise InvalidParameterError(f"Order must be non-negative, got {n}", "n")
    params = base.params
    terms = [spectral_filter(base.profile)]
    operator = LinearizedOperator(base=terms[0], freq=base.multiplier, params=params)
    for k in range(1, n + 1):
        rhs = action_rhs(terms, k, params)
        terms.append(_smooth_correction(operator.solve(rhs, tol), "f", k))
        logger.info(
            "Built action correction",
            extra={"context": {"k": k, "norm": l2_norm(terms[k]), "rhs_norm": l2_norm(rhs)}},
        )
    return ExpansionSeries(kind=ProblemKind.ACTION, base=base, terms=tuple(terms))


def build_energy_expansion(
    base: GroundStateResult, n: int = DEFAULT_ORDER, tol: float = SOLVE_TOL
) -> ExpansionSeries:
    """Corrections g_1..g_n with a_1..a_{n+1}, b_1..b_{n+1} around w_inf."""
    _check_base(base, ProblemKind.ENERGY)
    if n < 0:
        raise InvalidParameterError(f"Order must be non-negative, got {n}", "n")
    params = base.params
    omega = base.multiplier
    terms = [spectral_filter(base.profile)]
    operator = LinearizedOperator(base=terms[0], freq=omega, params=params)
    a: list[float] = []
    b: list[float] = []
    for k in range(1, n + 2):
        a.append(coeff_a(terms, k, omega, params))
        b.append(coeff_b(terms, k, omega, params))
        if k > n:
            break
        rhs = energy_rhs(terms, k, b, params)
        terms.append(_smooth_correction(operator.solve(rhs, tol), "g", k))
        logger.info(
            "Built energy correction",
            extra={"context": {"k": k, "a": a[-1], "b": b[-1], "norm": l2_norm(terms[k])}},
        )
    return ExpansionSeries(
        kind=ProblemKind.ENERGY, base=base, terms=tuple(terms), a=tuple(a), b=tuple(b)
    )


def build_expansion(base: GroundStateResult, n: int = DEFAULT_ORDER) -> ExpansionSeries:
    if base.kind is ProblemKind.ACTION:
        return build_action_expansion(base, n)
    return build_energy_expansion(base, n)


# =============================================================================
# Coefficients
# =============================================================================


def _require(terms: Sequence[RadialField], j: int) -> None:
    if j < 1:
        raise InvalidParameterError(f"Coefficient index must be >= 1, got {j}", "j")
    if len(terms) < j:
        raise SeriesError(f"Coefficient {j} needs g_0..g_{j - 1}, have {len(terms)} fields")


@cache
def _central_binomial_weight(t: int) -> float:
    return math.comb(2 * t, t) / 4.0**t


def _lap_power_pairing(terms: Sequence[RadialField], power: int, k: int, ell: int) -> float:
    """<(-Lap)^(power/2) g_k, (-Lap)^(power/2) g_ell> through FracLap multipliers."""
    op = MultiplierSpec.frac_lap(power / 2.0)
    return inner_product(apply_multiplier(op, terms[k]), apply_multiplier(op, terms[ell]))


def coeff_a1(terms: Sequence[RadialField], j: int, params: PhysicalParams) -> float:
    """
    a_{1,j} = sum_{t+s=j, t>=1} sum_{k+l=s} (-1)^t alpha_{t+1} / m^(2t+1)
              <(-Lap)^((t+1)/2) g_k, (-Lap)^((t+1)/2) g_l>.
    """
    _require(terms, j)
    m = params.m
    total = 0.0
    for t in range(1, j + 1):
        s = j - t
        weight = (-1.0) ** t * alpha(t + 1) / m ** (2 * t + 1)
        total += weight * sum(
            _lap_power_pairing(terms, t + 1, k, s - k) for k in range(s + 1)
        )
    return total


def coeff_a2(
    terms: Sequence[RadialField], j: int, omega: float, params: PhysicalParams
) -> float:
    """
    a_{2,j} = sum_{i+k=j} (omega <g_i, g_k> + d2E[g_i, g_k] / 2)
              + (1/6) sum_{i+k+l=j} d3E[g_i, g_k, g_l]
              + (1/24) sum_{i+k+l+p=j} d4E[g_i, g_k, g_l, g_p],
    all indices >= 1 and derivatives taken at g_0.
    """
    _require(terms, j)
    w = terms[0]
    total = 0.0
    for i, k in compositions(j, 2, j):
        total += omega * inner_product(terms[i], terms[k])
        total += 0.5 * limit_energy_derivative(w, [terms[i], terms[k]], 2, params)
    for order, weight in ((3, 1.0 / 6.0), (4, 1.0 / 24.0)):
        for combo in compositions(j, order, j):
            hs = [terms[index] for index in combo]
            total += weight * limit_energy_derivative(w, hs, order, params)
    return total


def coeff_b1(terms: Sequence[RadialField], j: int, params: PhysicalParams) -> float:
    """
    b_{1,j} = sum_{z+l=j, z>=1} (-1)^z / m^(2z+1) sum_{s+t=z} alpha_{s+1} binom(2t,t)/4^t
              sum_{p+q=l} <(-Lap)^((z+1)/2) g_q, (-Lap)^((z+1)/2) g_p>.
    """
    _require(terms, j)
    m = params.m
    total = 0.0
    for z in range(1, j + 1):
        ell = j - z
        symbol_weight = sum(alpha(s + 1) * _central_binomial_weight(z - s) for s in range(z + 1))
        pairings = sum(_lap_power_pairing(terms, z + 1, q, ell - q) for q in range(ell + 1))
        total += (-1.0) ** z / m ** (2 * z + 1) * symbol_weight * pairings
    return total


def coeff_a(terms: Sequence[RadialField], j: int, omega: float, params: PhysicalParams) -> float:
    """a_j = a_{1,j} + a_{2,j}."""
    return coeff_a1(terms, j, params) + coeff_a2(terms, j, omega, params)


def coeff_b(terms: Sequence[RadialField], j: int, omega: float, params: PhysicalParams) -> float:
    """b_j = -3 a_j + a_{1,j} - b_{1,j}."""
    a1 = coeff_a1(terms, j, params)
    a = a1 + coeff_a2(terms, j, omega, params)
    return -3.0 * a + a1 - coeff_b1(terms, j, params)


# =============================================================================
# Checks and evaluation
# =============================================================================


def correction_residuals(series: ExpansionSeries) -> list[float]:
    """||L c_k - rhs_k|| / ||rhs_k|| for every stored correction, recomputed."""
    operator = series.operator()
    params = series.params
    residuals: list[float] = []
    for k in range(1, series.order + 1):
        if series.kind is ProblemKind.ACTION:
            rhs = action_rhs(series.terms, k, params)
        else:
            rhs = energy_rhs(series.terms, k, series.b, params)
        norm = l2_norm(rhs)
        residual = l2_norm(operator.apply(series.terms[k]) - rhs)
        residuals.append(residual / norm if norm > 0 else residual)
    return residuals


def correction_tails(series: ExpansionSeries, fraction: float = 0.5) -> list[float]:
    """Largest spectral coefficient beyond fraction*N, relative to the peak, per correction."""
    return [spectral_tail(correction, fraction) for correction in series.corrections]


def normalization_defects(series: ExpansionSeries) -> list[float]:
    """sum_{i+k=j} <g_i, g_k> for j = 1..order; zero when ||w_c|| = 1 holds order by order."""
    if series.kind is not ProblemKind.ENERGY:
        raise InvalidParameterError("Normalization defects apply to energy series", "kind")
    terms = series.terms
    return [
        sum(inner_product(terms[i], terms[j - i]) for i in range(j + 1))
        for j in range(1, series.order + 1)
    ]


def eval_series(series: ExpansionSeries, c: float, up_to: int) -> RadialField:
    """f_0 + sum_{j=1..up_to} f_j c^(-2j)."""
    if up_to < 0 or up_to > series.order:
        raise SeriesError(f"Cannot truncate at {up_to}: series order is {series.order}")
    if not c > 0:
        raise InvalidParameterError(f"c must be positive, got {c}", "c")
    eps = 0.0 if math.isinf(c) else c**-2.0
    total = series.terms[0]
    for j in range(1, up_to + 1):
        total = total + eps**j * series.terms[j]
    return total


def eval_scalar_series(
    base_value: float, coeffs: Sequence[float], c: float, up_to: int
) -> float:
    """base + sum_{j=1..up_to} coeffs[j-1] c^(-2j)."""
    if up_to < 0 or up_to > len(coeffs):
        raise SeriesError(f"Cannot truncate at {up_to}: {len(coeffs)} coefficients available")
    if not c > 0:
        raise InvalidParameterError(f"c must be positive, got {c}", "c")
    eps = 0.0 if math.isinf(c) else c**-2.0
    return base_value + sum(coeffs[j - 1] * eps**j for j in range(1, up_to + 1))
