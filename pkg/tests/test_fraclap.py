import math
import random
from fractions import Fraction

import numpy as np
import pytest

from critex.fraclap import (
    DecayExpansion,
    FracLapQuadratureError,
    GridFunction,
    PolyDecayFunction,
    decay_samples,
    fourier_transform_polydecay,
    integer_laplacian_coeffs,
    load_grid,
    pointwise_bound_check,
    q_sigma_exponent,
    save_grid,
    singular_quadrature_apply,
    spectral_apply,
    value_at_origin,
    vanishing_theta,
)
from critex.special_functions import gamma


class TestGrid:
    def test_sine_is_eigenfunction(self):
        gf = GridFunction.from_callable(1, math.pi, 256, np.sin)
        for sigma in (0.5, 1.0):
            out = spectral_apply(gf, sigma)
            assert np.max(np.abs(out.values - gf.values)) < 1e-10

    def test_constant_maps_to_zero(self):
        gf = GridFunction.from_callable(1, 1.0, 64, lambda x: np.full_like(x, 3.0))
        out = spectral_apply(gf, 0.7)
        assert np.max(np.abs(out.values)) < 1e-12

    def test_rejects_negative_sigma_and_nonfinite(self):
        gf = GridFunction.from_callable(1, 1.0, 32, lambda x: x)
        with pytest.raises(ValueError):
            spectral_apply(gf, -0.5)
        bad = gf.values.copy()
        bad[0] = np.nan
        with pytest.raises(ValueError):
            GridFunction(1, (32,), gf.spacing, 1.0, bad)

    def test_roundtrip_serialization(self, tmp_path):
        gf = GridFunction.from_callable(2, 2.0, 16, lambda x, y: np.exp(-(x**2) - y**2))
        save_grid(gf, tmp_path / "field")
        back = load_grid(tmp_path / "field")
        assert back.dim == 2 and back.shape == (16, 16)
        assert np.array_equal(back.values, gf.values)


class TestIntegerExpansion:
    def test_reference_coefficients(self):
        exp = integer_laplacian_coeffs(1, 3, 1)
        assert exp.coeffs == (Fraction(-12), Fraction(15))
        assert [e for _, e in exp.terms] == [5, 7]

    def test_origin_sum_is_nq(self):
        rng = random.Random(3)
        for _ in range(40):
            n = rng.randint(1, 3)
            q = Fraction(rng.randint(4, 40), rng.randint(1, 4))
            exp = integer_laplacian_coeffs(n, q, 1)
            assert sum(exp.coeffs) == n * q

    def test_against_finite_differences(self):
        # second power in 1-D is the fourth derivative; centered stencil with
        # two Richardson levels reaches ~1e-7 absolute on this profile
        q = 2.0
        exp = integer_laplacian_coeffs(1, 2, 2)
        f = lambda x: (1.0 + x**2) ** (-q / 2)

        def stencil(x, h):
            return (
                f(x - 2 * h) - 4 * f(x - h) + 6 * f(x) - 4 * f(x + h) + f(x + 2 * h)
            ) / h**4

        def fourth_derivative(x, h=0.05):
            d1, d2, d3 = stencil(x, h), stencil(x, h / 2), stencil(x, h / 4)
            r1, r2 = (4 * d2 - d1) / 3, (4 * d3 - d2) / 3
            return (16 * r2 - r1) / 15

        for x in np.linspace(-5, 5, 21):
            assert abs(float(exp(np.array([x]))) - fourth_derivative(x)) < 1e-6


class TestValueAtOrigin:
    def test_reference_values(self):
        assert value_at_origin(1, 0.5, 2) == pytest.approx(1.0, rel=1e-12)
        assert value_at_origin(3, 1, 4) == pytest.approx(12.0, rel=1e-12)
        assert value_at_origin(1, 1, 2) == pytest.approx(2.0, rel=1e-12)

    def test_sigma_one_equals_nq(self):
        rng = random.Random(5)
        for _ in range(50):
            n = rng.randint(1, 5)
            q = n + rng.uniform(0.2, 3.0)
            assert value_at_origin(n, 1, q) == pytest.approx(n * q, rel=1e-12)

    def test_gamma_consistency_with_expansion(self):
        # closed form at sigma=1 against the exact rational expansion at x=0
        rng = random.Random(9)
        for _ in range(20):
            n = rng.randint(1, 3)
            q = Fraction(rng.randint(2 * n + 1, 24), 2)
            exact = sum(integer_laplacian_coeffs(n, q, 1).coeffs)
            closed = value_at_origin(n, 1, float(q))
            assert closed == pytest.approx(float(exact), rel=1e-12)

    def test_domain_checks(self):
        with pytest.raises(ValueError):
            value_at_origin(1, 0.5, 0.5)
        with pytest.raises(ValueError):
            value_at_origin(1, -0.5, 2)


class TestSingularQuadrature:
    def test_origin_reference_case(self):
        phi = PolyDecayFunction(q=Fraction(2))
        value = singular_quadrature_apply(phi, 0.5, np.zeros(1))
        assert value == pytest.approx(1.0, abs=1e-4)

    def test_origin_triangle(self):
        # quadrature vs closed form vs spectral, all at x = 0
        cases = [(1, 0.5, Fraction(2)), (2, 0.75, Fraction(3)), (3, 0.25, Fraction(7, 2))]
        for n, sigma, q in cases:
            phi = PolyDecayFunction(q=q)
            quad = singular_quadrature_apply(phi, sigma, np.zeros(n))
            closed = value_at_origin(n, sigma, float(q))
            assert quad == pytest.approx(closed, rel=1e-4)
        # spectral route, 1-D, coarse oracle
        q = 2.0
        gf = GridFunction.from_callable(1, 60.0, 2**12, lambda x: (1 + x**2) ** (-q / 2))
        sp = spectral_apply(gf, 0.5)
        center = np.argmin(np.abs(gf.axis))
        assert sp.values[center] == pytest.approx(value_at_origin(1, 0.5, q), rel=1e-2)

    def test_offaxis_agrees_with_spectral(self):
        q = 2.0
        gf = GridFunction.from_callable(1, 400.0, 2**15, lambda x: (1 + x**2) ** (-q / 2))
        sp = spectral_apply(gf, 0.5)
        phi = PolyDecayFunction(q=Fraction(2))
        idx = np.argmin(np.abs(gf.axis - 10.0))
        quad = singular_quadrature_apply(phi, 0.5, np.array([gf.axis[idx]]))
        assert quad == pytest.approx(sp.values[idx], rel=1e-3)

    def test_composition_matches_spectral(self):
        # sigma = 1 + s applied as exact expansion plus fractional quadrature
        q = 2.0
        gf = GridFunction.from_callable(1, 400.0, 2**15, lambda x: (1 + x**2) ** (-q / 2))
        sp = spectral_apply(gf, 1.5)
        phi = PolyDecayFunction(q=Fraction(2))
        for target in (0.0, 2.0, 5.0, 10.0):
            idx = np.argmin(np.abs(gf.axis - target))
            quad = singular_quadrature_apply(phi, 1.5, np.array([gf.axis[idx]]))
            assert quad == pytest.approx(sp.values[idx], rel=1e-2)

    def test_integer_sigma_is_exact_expansion(self):
        phi = PolyDecayFunction(q=Fraction(5, 2))
        expansion = integer_laplacian_coeffs(1, Fraction(5, 2), 1)
        for x in (0.0, 1.5, 20.0):
            assert singular_quadrature_apply(phi, 1, np.array([x])) == pytest.approx(
                float(expansion(np.array([x]))), rel=1e-14
            )

    def test_scale_parameter(self):
        # <x/R>^-q picks up the factor R^(-2 sigma) against the unscaled value
        phi = PolyDecayFunction(q=Fraction(2), R=4.0)
        base = PolyDecayFunction(q=Fraction(2))
        v_scaled = singular_quadrature_apply(phi, 0.5, np.array([2.0]))
        v_plain = singular_quadrature_apply(base, 0.5, np.array([0.5]))
        assert v_scaled == pytest.approx(v_plain / 4.0, rel=1e-10)

    def test_rejects_bad_domain(self):
        with pytest.raises(ValueError):
            singular_quadrature_apply(PolyDecayFunction(q=Fraction(2)), 0.5, np.zeros(4))
        with pytest.raises(ValueError):
            singular_quadrature_apply(PolyDecayFunction(q=Fraction(2)), -1, np.zeros(1))
        with pytest.raises(ValueError):
            # q must exceed the dimension
            singular_quadrature_apply(PolyDecayFunction(q=Fraction(2)), 0.5, np.zeros(3))


class TestDecay:
    def test_slope_n1_fractional(self):
        slope = pointwise_bound_check(1, 0.5, 2)
        assert slope == pytest.approx(-2.0, abs=0.1)

    def test_slope_n1_integer(self):
        slope = pointwise_bound_check(1, 1, 2)
        assert slope == pytest.approx(-4.0, abs=0.1)

    def test_slope_n2_contract(self):
        slope = pointwise_bound_check(2, 0.75, 2.5)
        assert slope <= -(2 + 1.5) + 0.15

    def test_bound_column_dominates(self):
        rows = decay_samples(1, 0.5, 2, [10.0, 20.0, 50.0, 100.0])
        for _, value, bound in rows:
            assert abs(value) <= bound * 1.05

    def test_q_sigma_exponent(self):
        assert q_sigma_exponent(1, 1, 2) == 4.0
        assert q_sigma_exponent(1, 0.5, 2) == 2.0
        assert q_sigma_exponent(2, 1.75, 2.5) == 3.5


class TestFourierTransform:
    def test_exponential_closed_form(self):
        for xi in (0.5, 1.0, 2.0):
            expected = math.sqrt(math.pi / 2) * math.exp(-xi)
            assert fourier_transform_polydecay(1, 2, xi) == pytest.approx(
                expected, rel=1e-8
            )

    def test_against_direct_quadrature(self):
        from scipy import integrate

        def direct(n, q, xi):
            if n == 1:
                val, _ = integrate.quad(
                    lambda x: (1 + x * x) ** (-q / 2), 0, np.inf,
                    weight="cos", wvar=xi, limit=400,
                )
                return math.sqrt(2 / math.pi) * val
            val, _ = integrate.quad(
                lambda r: r * (1 + r * r) ** (-q / 2), 0, np.inf,
                weight="sin", wvar=xi, limit=400,
            )
            return (2 * math.pi) ** (-1.5) * 4 * math.pi / xi * val

        for n, q in ((1, 2), (1, 3), (3, 4)):
            assert fourier_transform_polydecay(n, q, 1.0) == pytest.approx(
                direct(n, q, 1.0), rel=1e-5
            )


class TestVanishingTheta:
    def test_reference_values(self):
        assert vanishing_theta(1, 0.5, 2, 2) == pytest.approx(2 / 3, abs=1e-12)
        assert vanishing_theta(1, 1, 2, 2) == pytest.approx(0.5, abs=1e-12)

    def test_small_eps_limit(self):
        theta = vanishing_theta(1, 0.5, 2, 1e-3)
        assert 0.999 < theta < 1.0

    def test_combination_vanishes_at_origin(self):
        n, sigma, q, eps = 1, 0.5, Fraction(2), 2
        theta = vanishing_theta(n, sigma, q, eps)
        lhs = singular_quadrature_apply(PolyDecayFunction(q=q), sigma, np.zeros(n))
        rhs = singular_quadrature_apply(PolyDecayFunction(q=q + eps), sigma, np.zeros(n))
        combo = lhs - theta * rhs
        assert abs(combo) <= 1e-6 * value_at_origin(n, sigma, float(q))
