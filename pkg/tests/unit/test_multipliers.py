"""Unit tests for the radial Fourier symbols and their application to fields."""

import math

import numpy as np
import pytest

from relhartree.errors import InvalidParameterError
from relhartree.models import PhysicalParams
from relhartree.multipliers import (
    MultiplierSpec,
    SymbolKind,
    alpha,
    apply_multiplier,
    eval_symbol,
    quadratic_form,
    remainder_rate,
)
from relhartree.radial_core import RadialField, RadialGrid, gaussian, spectral_pairing

pytestmark = pytest.mark.unit

RHO = np.linspace(0.0, 50.0, 2001)


class TestAlpha:
    """Tests for the Taylor coefficients of sqrt(1 + t) - 1."""

    @pytest.mark.parametrize(
        ("k", "value"), [(1, 0.5), (2, 0.125), (3, 0.0625), (4, 5 / 128), (5, 7 / 256)]
    )
    def test_values(self, k: int, value: float) -> None:
        """First coefficients are 1/2, 1/8, 1/16, 5/128, 7/256."""
        assert alpha(k) == value

    def test_closed_form(self) -> None:
        """alpha_k = (2k-2)! / (k! (k-1)! 2^(2k-1))."""
        for k in range(1, 20):
            exact = math.factorial(2 * k - 2) / (
                math.factorial(k) * math.factorial(k - 1) * 2 ** (2 * k - 1)
            )
            assert alpha(k) == pytest.approx(exact, rel=1e-14)

    def test_rejects_zero(self) -> None:
        """alpha is defined from k = 1."""
        with pytest.raises(InvalidParameterError):
            alpha(0)


class TestSymbols:
    """Tests for symbol values and their algebraic relations."""

    def test_pc_below_pinf(self) -> None:
        """0 <= P_c <= P_inf, with equality only at rho = 0."""
        params = PhysicalParams(c=3.0)
        pc = eval_symbol(MultiplierSpec.pc(params), RHO)
        pinf = eval_symbol(MultiplierSpec.pinf(params), RHO)
        assert np.all(pc >= 0)
        assert np.all(pc <= pinf)
        assert pc[0] == 0.0

    def test_pc_matches_rest_energy_form(self) -> None:
        """P_c equals m c^2 (sqrt(1 + x) - 1) where that form is well conditioned."""
        m, c = 2.0, 3.0
        rho = np.linspace(1.0, 30.0, 50)
        expected = m * c * c * (np.sqrt(1.0 + (rho / (m * c)) ** 2) - 1.0)
        values = eval_symbol(MultiplierSpec.pc(PhysicalParams(m=m, c=c)), rho)
        np.testing.assert_allclose(values, expected, rtol=1e-12)

    def test_pc_approaches_pinf(self) -> None:
        """P_c -> P_inf as c grows, with relative gap about rho^2 / (4 m^2 c^2)."""
        rho = np.array([0.5, 1.0, 2.0])
        pinf = rho * rho / 2.0
        for c in (1e2, 1e4):
            pc = eval_symbol(MultiplierSpec.pc(PhysicalParams(c=c)), rho)
            np.testing.assert_allclose((pinf - pc) / pinf, rho**2 / (4 * c * c), rtol=1e-3)

    def test_tc_is_virial_derivative(self) -> None:
        """T_c = rho P_c'(rho) - P_c, checked by central differences."""
        params = PhysicalParams(m=1.5, c=2.0)
        spec = MultiplierSpec.pc(params)
        rho = np.linspace(0.5, 20.0, 40)
        step = 1e-5
        derivative = (eval_symbol(spec, rho + step) - eval_symbol(spec, rho - step)) / (2 * step)
        expected = rho * derivative - eval_symbol(spec, rho)
        tc = eval_symbol(MultiplierSpec.tc(params), rho)
        np.testing.assert_allclose(tc, expected, rtol=1e-7)

    def test_pinf_n_values(self) -> None:
        """P_inf,n = (-1)^n alpha_{n+1} rho^(2n+2) / m^(2n+1)."""
        params = PhysicalParams(m=2.0)
        rho = np.array([1.0, 3.0])
        np.testing.assert_allclose(eval_symbol(MultiplierSpec.pinf_n(0, params), rho), rho**2 / 4)
        np.testing.assert_allclose(
            eval_symbol(MultiplierSpec.pinf_n(1, params), rho), -rho**4 / (8 * 2.0**3)
        )
        np.testing.assert_allclose(
            eval_symbol(MultiplierSpec.pinf_n(2, params), rho), rho**6 / (16 * 2.0**5)
        )

    @pytest.mark.parametrize(("m", "c"), [(1.0, 10.0), (1.0, 1.0), (2.0, 3.0)])
    @pytest.mark.parametrize("n", [1, 2, 3, 4])
    def test_remainder_sign(self, n: int, m: float, c: float) -> None:
        """(-1)^n P_c,n >= 0 for every rho."""
        values = eval_symbol(MultiplierSpec.pc_n(n, PhysicalParams(m=m, c=c)), RHO)
        assert np.all((-1) ** n * values >= 0)

    @pytest.mark.parametrize("n", [1, 2, 3])
    def test_remainder_lagrange_bound(self, n: int) -> None:
        """|P_c,n| <= alpha_{n+1} rho^(2n+2) / (m^(2n+1) c^(2n))."""
        m, c = 1.0, 2.0
        values = eval_symbol(MultiplierSpec.pc_n(n, PhysicalParams(m=m, c=c)), RHO)
        bound = alpha(n + 1) * RHO ** (2 * n + 2) / (m ** (2 * n + 1) * c ** (2 * n))
        assert np.all(np.abs(values) <= bound * (1 + 1e-12) + 1e-300)

    def test_remainder_recursion(self) -> None:
        """P_c,n+1 = P_c,n - c^(-2n) P_inf,n on both sides of the tail switch."""
        params = PhysicalParams(m=1.0, c=4.0)
        rho = np.linspace(0.1, 12.0, 120)
        for n in (1, 2, 3):
            lhs = eval_symbol(MultiplierSpec.pc_n(n + 1, params), rho)
            rhs = eval_symbol(MultiplierSpec.pc_n(n, params), rho) - params.c ** (
                -2 * n
            ) * eval_symbol(MultiplierSpec.pinf_n(n, params), rho)
            np.testing.assert_allclose(lhs, rhs, rtol=1e-9, atol=1e-15)

    def test_first_remainder_is_pc_minus_pinf(self) -> None:
        """P_c,1 = P_c - P_inf."""
        params = PhysicalParams(c=5.0)
        expected = eval_symbol(MultiplierSpec.pc(params), RHO) - eval_symbol(
            MultiplierSpec.pinf(params), RHO
        )
        values = eval_symbol(MultiplierSpec.pc_n(1, params), RHO)
        np.testing.assert_allclose(values, expected, rtol=1e-10, atol=1e-12)

    def test_scalar_input(self) -> None:
        """A scalar rho yields a 0-d array."""
        value = eval_symbol(MultiplierSpec.frac_lap(1.0), 3.0)
        assert value.shape == ()
        assert float(value) == 9.0

    def test_negative_rho_raises(self) -> None:
        """Symbols are only evaluated at rho >= 0."""
        with pytest.raises(InvalidParameterError):
            eval_symbol(MultiplierSpec.frac_lap(1.0), [-1.0, 1.0])


class TestSpecValidation:
    """Tests for MultiplierSpec construction rules."""

    def test_kinetic_selects_by_c(self) -> None:
        """kinetic() is P_c at finite c and P_inf at the limit."""
        assert MultiplierSpec.kinetic(PhysicalParams(c=10.0)).kind is SymbolKind.PC
        assert MultiplierSpec.kinetic(PhysicalParams()).kind is SymbolKind.PINF

    @pytest.mark.parametrize(
        "build",
        [
            lambda: MultiplierSpec(kind=SymbolKind.PC),
            lambda: MultiplierSpec(kind=SymbolKind.PINF_N, params=PhysicalParams()),
            lambda: MultiplierSpec.pc_n(2, PhysicalParams()),
            lambda: MultiplierSpec.pc_n(0, PhysicalParams(c=10.0)),
            lambda: MultiplierSpec(kind=SymbolKind.FRAC_LAP),
            lambda: MultiplierSpec.resolvent(MultiplierSpec.frac_lap(1.0), 0.0),
            lambda: MultiplierSpec.resolvent(MultiplierSpec.frac_lap(1.0), -1.0),
        ],
    )
    def test_rejects_incomplete_specs(self, build) -> None:
        """Missing parameters, c = INFINITY remainders and non-positive shifts are rejected."""
        with pytest.raises(InvalidParameterError):
            build()

    def test_specs_are_hashable(self) -> None:
        """Equal specs hash alike, so symbol tables are shared."""
        a = MultiplierSpec.pc_n(2, PhysicalParams(c=10.0))
        b = MultiplierSpec.pc_n(2, PhysicalParams(c=10.0))
        assert a == b
        assert hash(a) == hash(b)


class TestApplyMultiplier:
    """Tests for symbol application on fields."""

    def test_frac_lap_is_laplacian(self, grid: RadialGrid) -> None:
        """FracLap(1) on a Gaussian is -Laplace u = (3/w^2 - r^2/w^4) u."""
        width = 1.2
        u = gaussian(grid, width)
        r = grid.nodes
        expected = (3.0 / width**2 - r * r / width**4) * u.values
        result = apply_multiplier(MultiplierSpec.frac_lap(1.0), u)
        np.testing.assert_allclose(result.values, expected, atol=1e-8)

    def test_resolvent_inverts_shifted_operator(self, random_field) -> None:
        """(P_inf + mu) applied after Resolvent(P_inf, mu) is the identity."""
        u = random_field()
        pinf = MultiplierSpec.pinf(PhysicalParams())
        v = apply_multiplier(MultiplierSpec.resolvent(pinf, 0.7), u)
        back = apply_multiplier(pinf, v) + 0.7 * v
        np.testing.assert_allclose(back.values, u.values, atol=1e-10 * u.max_abs())

    def test_quadratic_form_matches_pairing(self, random_field) -> None:
        """<P_inf u, u> = ||grad u||^2 / 2m."""
        u = random_field()
        params = PhysicalParams(m=1.5)
        expected = spectral_pairing(u, u, 1.0) / 3.0
        assert quadratic_form(MultiplierSpec.pinf(params), u) == pytest.approx(expected, rel=1e-12)

    def test_pc_form_below_pinf_form(self, random_field) -> None:
        """<P_c u, u> <= <P_inf u, u>."""
        u = random_field()
        params = PhysicalParams(c=2.0)
        assert quadratic_form(MultiplierSpec.pc(params), u) <= quadratic_form(
            MultiplierSpec.pinf(params), u
        )


class TestRemainderRate:
    """Tests for the remainder decay measurement."""

    @pytest.mark.parametrize("n", [1, 2])
    def test_slope_is_minus_two_n(self, grid: RadialGrid, n: int) -> None:
        """||P_c,n f|| decays like c^(-2n) for a smooth f."""
        c_list = [10.0 * 2**k for k in range(5)]
        slope = remainder_rate(n, gaussian(grid, 1.0), c_list)
        assert slope == pytest.approx(-2.0 * n, abs=0.05)

    def test_needs_two_values(self, grid: RadialGrid) -> None:
        """A single c value cannot give a slope."""
        with pytest.raises(InvalidParameterError):
            remainder_rate(1, gaussian(grid), [10.0])

    def test_zero_field_is_rejected(self, grid: RadialGrid) -> None:
        """A field with no spectral mass gives no rate."""
        from relhartree.errors import FitError

        with pytest.raises(FitError):
            remainder_rate(1, RadialField.zeros(grid), [10.0, 20.0])
