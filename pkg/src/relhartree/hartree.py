"""
Hartree nonlinearity and the functionals built on it.

N(u) = (|x|^-1 * u^2) u with its derivatives N1, N2, N3 (N^(k) = 0 for
k >= 4), the Coulomb potential of a radial density by Newton's theorem,
the action/energy functionals, the composition sums T_k of the
expansion recursion, and the multilinear derivatives of E_inf.
"""

import math
from collections import Counter
from collections.abc import Sequence
from itertools import product

import numpy as np
from scipy.integrate import cumulative_trapezoid

from .errors import InvalidParameterError
from .models import FunctionalKind, FunctionalValue, PhysicalParams
from .multipliers import MultiplierSpec, apply_multiplier, quadratic_form, symbol_table
from .radial_core import (
    RadialField,
    SpectralField,
    inner_product,
    inverse_sine_transform,
    same_grid,
    sine_transform,
)

# =============================================================================
# Coulomb potential
# =============================================================================


def coulomb_potential(f: RadialField) -> RadialField:
    """
    (|x|^-1 * f)(r) = (4 pi / r) int_0^r s^2 f ds + 4 pi int_r^R s f ds.

    Both integrals use the cumulative trapezoid with the zero end nodes.
    The leading Euler-Maclaurin error of the pair is (pi dr^2 / 3) f and is
    subtracted, which keeps the discrete kernel symmetric and lifts the
    scheme to fourth order for densities decaying inside R.
    """
    grid = f.grid
    r = grid.nodes
    dr = grid.dr
    zero = np.zeros(1)

    interior = cumulative_trapezoid(
        np.concatenate((zero, r * r * f.values)), dx=dr, initial=0.0
    )[1:]
    outer_integrand = np.concatenate((zero, r * f.values, zero))
    exterior = cumulative_trapezoid(outer_integrand[::-1], dx=dr, initial=0.0)[::-1][1:-1]

    potential = 4.0 * math.pi * (interior / r + exterior)
    potential -= (math.pi * dr * dr / 3.0) * f.values
    return RadialField(grid, potential)


def total_charge(f: RadialField) -> float:
    """Q = 4 pi int s^2 f ds."""
    grid = f.grid
    return grid.measure * float(np.dot(grid.nodes * grid.nodes, f.values))


def coulomb_potential_spectral(f: RadialField) -> RadialField:
    """
    Spectral route: Dirichlet Poisson solve with symbol 4 pi / rho^2 on r*V,
    plus the constant Q/R carried by the true potential at r = R.
    """
    grid = f.grid
    coeffs = sine_transform(f).coeffs * (4.0 * math.pi / grid.frequencies**2)
    dirichlet = inverse_sine_transform(SpectralField(grid, coeffs))
    return dirichlet + total_charge(f) / grid.radius


def coulomb_pairing(a: RadialField, b: RadialField) -> float:
    """<|x|^-1 * a, b> = iint a(x) b(y) / |x - y|."""
    return inner_product(coulomb_potential(a), b)


# =============================================================================
# Nonlinearity and derivatives
# =============================================================================


def nonlinearity(u: RadialField) -> RadialField:
    """N(u) = (|x|^-1 * u^2) u."""
    return coulomb_potential(u * u) * u


def nonlinearity_d1(u: RadialField, h: RadialField) -> RadialField:
    """N1(u)[h] = (|x|^-1 * u^2) h + 2 (|x|^-1 * (u h)) u."""
    same_grid(u, h)
    return coulomb_potential(u * u) * h + 2.0 * coulomb_potential(u * h) * u


def nonlinearity_d2(u: RadialField, h1: RadialField, h2: RadialField) -> RadialField:
    """N2(u)[h1, h2] = 2 V[h1 h2] u + 2 V[u h1] h2 + 2 V[u h2] h1."""
    same_grid(u, h1, h2)
    return 2.0 * (
        coulomb_potential(h1 * h2) * u
        + coulomb_potential(u * h1) * h2
        + coulomb_potential(u * h2) * h1
    )


def nonlinearity_d3(h1: RadialField, h2: RadialField, h3: RadialField) -> RadialField:
    """N3[h1, h2, h3] = 2 (V[h1 h2] h3 + V[h2 h3] h1 + V[h1 h3] h2); independent of u."""
    same_grid(h1, h2, h3)
    return 2.0 * (
        coulomb_potential(h1 * h2) * h3
        + coulomb_potential(h2 * h3) * h1
        + coulomb_potential(h1 * h3) * h2
    )


def nonlinearity_derivative(
    order: int, u: RadialField, hs: Sequence[RadialField]
) -> RadialField:
    """Dispatch N^(order)(u)[hs]; zero for order >= 4."""
    if order == 1:
        return nonlinearity_d1(u, hs[0])
    if order == 2:
        return nonlinearity_d2(u, hs[0], hs[1])
    if order == 3:
        return nonlinearity_d3(hs[0], hs[1], hs[2])
    if order >= 4:
        return RadialField.zeros(u.grid)
    raise InvalidParameterError(f"Derivative order must be >= 1, got {order}", "order")


# =============================================================================
# Functionals
# =============================================================================


def hartree_energy(u: RadialField) -> float:
    """H(u) = <N(u), u> = iint u^2(x) u^2(y) / |x - y|."""
    u2 = u * u
    return inner_product(coulomb_potential(u2), u2)


def kinetic_energy(u: RadialField, params: PhysicalParams) -> float:
    """<P u, u> with P = P_c, or P_inf at the limit."""
    return quadratic_form(MultiplierSpec.kinetic(params), u)


def _require_frequency(params: PhysicalParams) -> float:
    if params.lam is None:
        raise InvalidParameterError("The action functional needs lambda", "lambda")
    return params.lam


def action(u: RadialField, params: PhysicalParams) -> float:
    """J(u) = <(P + lambda) u, u> - H(u)/2."""
    lam = _require_frequency(params)
    return kinetic_energy(u, params) + lam * inner_product(u, u) - 0.5 * hartree_energy(u)


def energy(u: RadialField, params: PhysicalParams) -> float:
    """E(u) = <P u, u> - H(u)/2."""
    return kinetic_energy(u, params) - 0.5 * hartree_energy(u)


def nehari_residual(u: RadialField, params: PhysicalParams) -> float:
    """<(P + lambda) u, u> - H(u), half of dJ(u)[u]."""
    lam = _require_frequency(params)
    return kinetic_energy(u, params) + lam * inner_product(u, u) - hartree_energy(u)


def functional(kind: FunctionalKind, u: RadialField, params: PhysicalParams) -> FunctionalValue:
    if kind is FunctionalKind.ACTION:
        value = action(u, params)
    elif kind is FunctionalKind.ENERGY:
        value = energy(u, params)
    elif kind is FunctionalKind.HARTREE:
        value = hartree_energy(u)
    else:
        value = nehari_residual(u, params)
    return FunctionalValue(kind=kind, value=value)


# =============================================================================
# Expansion building blocks
# =============================================================================


def compositions(total: int, parts: int, largest: int) -> list[tuple[int, ...]]:
    """Ordered tuples of ``parts`` integers in 1..largest summing to ``total``."""
    return [
        combo for combo in product(range(1, largest + 1), repeat=parts) if sum(combo) == total
    ]


def composition_term(fields: Sequence[RadialField], k: int) -> RadialField:
    """
    T_k = sum_{j=2}^{min(k,3)} (1/j!) sum over ordered compositions
    i_1 + ... + i_j = k, 1 <= i_m <= k-1, of N^(j)(f_0)[f_i1, ..., f_ij].

    The forms are symmetric, so each multiset is evaluated once and
    weighted by its number of orderings.
    """
    if k < 1:
        raise InvalidParameterError(f"T_k needs k >= 1, got {k}", "k")
    if len(fields) < k:
        raise InvalidParameterError(f"T_{k} needs {k} fields, got {len(fields)}", "fields")
    base = fields[0]
    total = RadialField.zeros(base.grid)
    for j in range(2, min(k, 3) + 1):
        counts = Counter(tuple(sorted(c)) for c in compositions(k, j, k - 1))
        for indices, multiplicity in sorted(counts.items()):
            term = nonlinearity_derivative(j, base, [fields[i] for i in indices])
            total = total + (multiplicity / math.factorial(j)) * term
    return total


def limit_energy_derivative(
    w: RadialField, hs: Sequence[RadialField], k: int, params: PhysicalParams
) -> float:
    """
    k-th derivative of E_inf(u) = <P_inf u, u> - H(u)/2 at w along hs.

    dE    = 2 <P_inf w, h> - 2 <V[w^2], w h>
    d2E   = 2 <P_inf h1, h2> - (1/2) d2H,  d2H = 4 <V[w^2], h1 h2> + 8 <V[w h1], w h2>
    d3E   = -(1/2) * 8 sum_cyclic <V[h_i h_j], w h_k>
    d4E   = -(1/2) * 8 sum over the three pairings <V[h_i h_j], h_k h_l>
    """
    if k not in (1, 2, 3, 4):
        raise InvalidParameterError(f"E_inf derivatives exist for k in 1..4, got {k}", "k")
    if len(hs) != k:
        raise InvalidParameterError(f"Expected {k} directions, got {len(hs)}", "hs")
    same_grid(w, *hs)
    pinf = MultiplierSpec.pinf(params.limit())

    if k == 1:
        (h,) = hs
        return 2.0 * inner_product(apply_multiplier(pinf, w), h) - 2.0 * inner_product(
            coulomb_potential(w * w), w * h
        )
    if k == 2:
        h1, h2 = hs
        kinetic = 2.0 * w.grid.measure * float(
            np.dot(
                symbol_table(pinf, w.grid) * sine_transform(h1).coeffs,
                sine_transform(h2).coeffs,
            )
        )
        d2h = 4.0 * inner_product(coulomb_potential(w * w), h1 * h2) + 8.0 * coulomb_pairing(
            w * h1, w * h2
        )
        return kinetic - 0.5 * d2h
    if k == 3:
        h1, h2, h3 = hs
        cyclic = (
            coulomb_pairing(h1 * h2, w * h3)
            + coulomb_pairing(h2 * h3, w * h1)
            + coulomb_pairing(h1 * h3, w * h2)
        )
        return -4.0 * cyclic
    h1, h2, h3, h4 = hs
    pairings = (
        coulomb_pairing(h1 * h2, h3 * h4)
        + coulomb_pairing(h1 * h3, h2 * h4)
        + coulomb_pairing(h1 * h4, h2 * h3)
    )
    return -4.0 * pairings
