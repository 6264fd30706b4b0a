import math
import random

import numpy as np
import pytest
from scipy import integrate
from scipy import special as sps

from critex.special_functions import bessel_k, gamma


class TestGamma:
    def test_half_integer(self):
        assert gamma(0.5) == pytest.approx(math.sqrt(math.pi), rel=1e-14)

    def test_factorial(self):
        assert gamma(5) == 24

    def test_against_integral_oracle(self):
        target, _ = integrate.quad(lambda t: t**3.2 * math.exp(-t), 0, 60, limit=200)
        assert gamma(4.2) == pytest.approx(target, rel=1e-10)

    def test_recurrence_property(self):
        rng = random.Random(7)
        for _ in range(1000):
            x = rng.uniform(0.1, 50.0)
            assert gamma(x + 1) == pytest.approx(x * gamma(x), rel=1e-10)

    def test_rejects_nonpositive(self):
        with pytest.raises(ValueError):
            gamma(0.0)
        with pytest.raises(ValueError):
            gamma(-1.5)


class TestBesselK:
    def test_half_integer_closed_form(self):
        assert bessel_k(0.5, 1.0) == pytest.approx(
            math.sqrt(math.pi / 2) * math.exp(-1.0), rel=1e-10
        )
        for x in (0.5, 1.0, 3.0):
            k32 = math.sqrt(math.pi / (2 * x)) * math.exp(-x) * (1 + 1 / x)
            k52 = math.sqrt(math.pi / (2 * x)) * math.exp(-x) * (1 + 3 / x + 3 / x**2)
            assert bessel_k(1.5, x) == pytest.approx(k32, rel=1e-8)
            assert bessel_k(2.5, x) == pytest.approx(k52, rel=1e-8)

    def test_symmetry_in_order(self):
        for nu in (0.5, 1.3, 2.0):
            for x in (0.3, 1.0, 4.0):
                assert bessel_k(-nu, x) == bessel_k(nu, x)

    def test_k0_reference_value(self):
        assert bessel_k(0.0, 1.0) == pytest.approx(0.421024438240708, rel=1e-8)

    def test_monotone_decrease_in_x(self):
        xs = np.linspace(0.05, 6.0, 40)
        vals = [bessel_k(0.7, x) for x in xs]
        assert all(a > b for a, b in zip(vals, vals[1:]))

    def test_against_scipy(self):
        rng = random.Random(11)
        for _ in range(50):
            nu = rng.uniform(0.0, 3.0)
            x = rng.uniform(0.02, 8.0)
            assert bessel_k(nu, x) == pytest.approx(float(sps.kv(nu, x)), rel=1e-8)

    def test_rejects_nonpositive_argument(self):
        with pytest.raises(ValueError):
            bessel_k(0.5, 0.0)
