"""Shared fixtures and operator generators for the test suite."""

from __future__ import annotations

import random
from fractions import Fraction

import pytest

from critex.operator_model import OperatorSpec, OperatorTerm


def make_operator(n, m, ell, term_list, mode="fractional"):
    """term_list: iterable of (j, a, omega) with rational-convertible entries."""
    terms = [
        OperatorTerm(j, Fraction(a), Fraction(omega)) for j, a, omega in term_list
    ]
    return OperatorSpec.create(n=n, m=m, ell=ell, terms=terms, mode=mode)


def make_quasihomogeneous(n, m_p, ell, theta, coeffs):
    """Operator whose terms all scale together: omega_j = 2 (m_p - j) theta.

    ``coeffs[j]`` is the coefficient of the j-th term for j < m_p.
    """
    theta = Fraction(theta)
    term_list = [
        (j, coeffs[j], 2 * (m_p - j) * theta) for j in range(m_p) if coeffs[j] != 0
    ]
    return make_operator(n, m_p, ell, term_list)


_COEFFS = [Fraction(1), Fraction(-1), Fraction(2), Fraction(1, 2), Fraction(-3, 2)]


def random_operator(rng: random.Random, max_m: int = 4) -> OperatorSpec:
    """Random operator with quarter-integer spatial orders and m <= max_m."""
    m = rng.randint(1, max_m)
    ell = rng.randint(0, m - 1)
    n = rng.randint(1, 3)
    term_list = []
    for j in range(m):
        if rng.random() < 0.65:
            a = rng.choice(_COEFFS)
            omega = Fraction(rng.randint(0, 12), 4)
            term_list.append((j, a, omega))
    return make_operator(n, m, ell, term_list)


@pytest.fixture
def rng():
    return random.Random(20260810)
