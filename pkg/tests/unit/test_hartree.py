"""
Unit tests for the Coulomb potential, the Hartree nonlinearity and the functionals.

For the density f = exp(-r^2/a^2) the potential is pi^(3/2) a^3 erf(r/a) / r,
and for u = exp(-r^2 / 2w^2) the Hartree energy is sqrt(2) pi^(5/2) w^5.
"""

import math

import numpy as np
import pytest
from scipy.special import erf

from relhartree.errors import GridMismatchError, InvalidParameterError
from relhartree.hartree import (
    action,
    composition_term,
    compositions,
    coulomb_pairing,
    coulomb_potential,
    coulomb_potential_spectral,
    energy,
    hartree_energy,
    kinetic_energy,
    limit_energy_derivative,
    nehari_residual,
    nonlinearity,
    nonlinearity_d1,
    nonlinearity_d2,
    nonlinearity_d3,
    nonlinearity_derivative,
    total_charge,
)
from relhartree.models import PhysicalParams
from relhartree.radial_core import RadialField, RadialGrid, gaussian, inner_product, l2_norm

pytestmark = pytest.mark.unit


def _relative(a: RadialField, b: RadialField) -> float:
    return l2_norm(a - b) / l2_norm(b)


class TestCoulombPotential:
    """Tests for the Newton-theorem potential and its spectral counterpart."""

    @pytest.mark.parametrize("a", [0.8, 1.0, 2.0])
    def test_gaussian_density(self, grid: RadialGrid, a: float) -> None:
        """V[exp(-r^2/a^2)] = pi^(3/2) a^3 erf(r/a) / r."""
        density = RadialField.from_function(grid, lambda r: np.exp(-(r * r) / (a * a)))
        exact = RadialField.from_function(
            grid, lambda r: math.pi**1.5 * a**3 * erf(r / a) / r
        )
        assert _relative(coulomb_potential(density), exact) < 1e-5

    def test_spectral_route_agrees(self, random_field) -> None:
        """Newton quadrature and the Dirichlet Poisson solve agree."""
        f = random_field() * random_field()
        assert _relative(coulomb_potential(f), coulomb_potential_spectral(f)) < 1e-5

    def test_total_charge(self, grid: RadialGrid) -> None:
        """Q of exp(-r^2/a^2) is pi^(3/2) a^3."""
        density = gaussian(grid, 1.5 / math.sqrt(2.0))
        assert total_charge(density) == pytest.approx(math.pi**1.5 * 1.5**3, rel=1e-10)

    def test_potential_tends_to_point_charge(self, grid: RadialGrid) -> None:
        """Far from a localized density V = Q/r."""
        density = gaussian(grid, 0.7)
        potential = coulomb_potential(density)
        r = grid.nodes
        far = r > 15.0
        np.testing.assert_allclose(
            potential.values[far], total_charge(density) / r[far], rtol=1e-6
        )

    def test_discrete_kernel_is_symmetric(self, random_field) -> None:
        """<V[a], b> = <a, V[b]> up to round-off."""
        a, b = random_field(), random_field()
        assert coulomb_pairing(a, b) == pytest.approx(coulomb_pairing(b, a), rel=1e-11, abs=1e-14)

    def test_positive_definite(self, random_field) -> None:
        """<V[f], f> > 0 for a non-zero density."""
        f = random_field()
        assert coulomb_pairing(f, f) > 0


class TestNonlinearity:
    """Tests for N and its derivatives."""

    def test_homogeneity(self, random_field) -> None:
        """N1(u)[u] = 3 N(u)."""
        u = random_field()
        assert _relative(nonlinearity_d1(u, u), 3.0 * nonlinearity(u)) < 1e-12

    def test_taylor_expansion_terminates(self, random_field) -> None:
        """N(u + t h) is exactly cubic in t."""
        u, h = random_field(), random_field()
        for t in (0.1, 0.5, 1.0):
            exact = nonlinearity(u + t * h)
            taylor = (
                nonlinearity(u)
                + t * nonlinearity_d1(u, h)
                + (t * t / 2.0) * nonlinearity_d2(u, h, h)
                + (t**3 / 6.0) * nonlinearity_d3(h, h, h)
            )
            assert _relative(taylor, exact) < 1e-11

    def test_first_derivative_by_differences(self, random_field) -> None:
        """N1(u)[h] matches a central difference quotient."""
        u, h = random_field(), random_field()
        eps = 1e-4
        quotient = (nonlinearity(u + eps * h) - nonlinearity(u - eps * h)) / (2 * eps)
        assert _relative(quotient, nonlinearity_d1(u, h)) < 1e-7

    def test_second_derivative_is_symmetric(self, random_field) -> None:
        """N2(u)[h1, h2] = N2(u)[h2, h1]."""
        u, h1, h2 = random_field(), random_field(), random_field()
        assert _relative(nonlinearity_d2(u, h1, h2), nonlinearity_d2(u, h2, h1)) < 1e-13

    def test_dispatch(self, random_field) -> None:
        """Orders 1..3 dispatch, order 4 and above vanish, order 0 is rejected."""
        u, h = random_field(), random_field()
        assert _relative(nonlinearity_derivative(2, u, [h, h]), nonlinearity_d2(u, h, h)) == 0.0
        assert nonlinearity_derivative(4, u, [h] * 4).max_abs() == 0.0
        with pytest.raises(InvalidParameterError):
            nonlinearity_derivative(0, u, [])

    def test_grid_mismatch(self, random_field) -> None:
        """Directions on another grid are refused."""
        other = gaussian(RadialGrid(31, 5.0))
        with pytest.raises(GridMismatchError):
            nonlinearity_d1(random_field(), other)


class TestFunctionals:
    """Tests for action, energy and the Hartree term."""

    @pytest.mark.parametrize("width", [1.0, 1.5])
    def test_hartree_energy_of_gaussian(self, grid: RadialGrid, width: float) -> None:
        """H(exp(-r^2 / 2w^2)) = sqrt(2) pi^(5/2) w^5."""
        expected = math.sqrt(2.0) * math.pi**2.5 * width**5
        assert hartree_energy(gaussian(grid, width)) == pytest.approx(expected, rel=1e-6)

    def test_action_energy_relation(self, random_field) -> None:
        """J(u) = E(u) + lambda ||u||^2 and J - Nehari residual = H/2."""
        u = random_field()
        params = PhysicalParams(lam=0.7, c=20.0)
        j = action(u, params)
        assert j == pytest.approx(energy(u, params) + 0.7 * inner_product(u, u), rel=1e-12)
        assert j - nehari_residual(u, params) == pytest.approx(0.5 * hartree_energy(u), rel=1e-10)

    def test_action_needs_lambda(self, random_field) -> None:
        """The action functional cannot be evaluated without lambda."""
        with pytest.raises(InvalidParameterError):
            action(random_field(), PhysicalParams())

    def test_relativistic_kinetic_energy_is_smaller(self, random_field) -> None:
        """<P_c u, u> < <P_inf u, u>, so E_c < E_inf."""
        u = random_field()
        limit = PhysicalParams()
        assert kinetic_energy(u, limit.with_c(5.0)) < kinetic_energy(u, limit)
        assert energy(u, limit.with_c(5.0)) < energy(u, limit)


class TestExpansionBlocks:
    """Tests for compositions, T_k and the derivatives of E_inf."""

    def test_compositions(self) -> None:
        """Ordered compositions with bounded parts."""
        assert compositions(3, 2, 2) == [(1, 2), (2, 1)]
        assert compositions(4, 3, 3) == [(1, 1, 2), (1, 2, 1), (2, 1, 1)]
        assert compositions(2, 3, 1) == []

    def test_low_order_terms(self, random_field) -> None:
        """T_1 = 0, T_2 = N2[f1, f1]/2, T_3 = N2[f1, f2] + N3[f1, f1, f1]/6."""
        f0, f1, f2 = random_field(), random_field(), random_field()
        fields = [f0, f1, f2]
        assert composition_term(fields, 1).max_abs() == 0.0
        t2 = 0.5 * nonlinearity_d2(f0, f1, f1)
        assert _relative(composition_term(fields, 2), t2) < 1e-13
        t3 = nonlinearity_d2(f0, f1, f2) + nonlinearity_d3(f1, f1, f1) / 6.0
        assert _relative(composition_term(fields, 3), t3) < 1e-13

    def test_fourth_term_uses_all_pairs(self, random_field) -> None:
        """T_4 = N2[f1, f3] + N2[f2, f2]/2 + N3[f1, f1, f2]/2."""
        fields = [random_field() for _ in range(4)]
        f0, f1, f2, f3 = fields
        expected = (
            nonlinearity_d2(f0, f1, f3)
            + 0.5 * nonlinearity_d2(f0, f2, f2)
            + 0.5 * nonlinearity_d3(f1, f1, f2)
        )
        assert _relative(composition_term(fields, 4), expected) < 1e-13

    def test_composition_term_needs_fields(self, random_field) -> None:
        """T_k needs f_0..f_{k-1}."""
        with pytest.raises(InvalidParameterError):
            composition_term([random_field()], 3)

    def test_energy_gradient_by_differences(self, random_field) -> None:
        """dE_inf(w)[h] matches a central difference quotient."""
        w, h = random_field(), random_field()
        params = PhysicalParams()
        eps = 1e-4
        quotient = (energy(w + eps * h, params) - energy(w - eps * h, params)) / (2 * eps)
        derivative = limit_energy_derivative(w, [h], 1, params)
        assert derivative == pytest.approx(quotient, rel=1e-6, abs=1e-10)

    def test_energy_taylor_expansion_terminates(self, random_field) -> None:
        """E_inf(w + t h) is exactly quartic in t."""
        w, h = random_field(), random_field()
        params = PhysicalParams()
        t = 0.4
        taylor = energy(w, params) + sum(
            t**k / math.factorial(k) * limit_energy_derivative(w, [h] * k, k, params)
            for k in range(1, 5)
        )
        assert taylor == pytest.approx(energy(w + t * h, params), rel=1e-10, abs=1e-12)

    def test_energy_derivative_order_is_bounded(self, random_field) -> None:
        """Only k = 1..4 exist; the direction count must match k."""
        w = random_field()
        with pytest.raises(InvalidParameterError):
            limit_energy_derivative(w, [w] * 5, 5, PhysicalParams())
        with pytest.raises(InvalidParameterError):
            limit_energy_derivative(w, [w], 2, PhysicalParams())
