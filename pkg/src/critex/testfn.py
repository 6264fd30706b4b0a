"""Smooth time cutoff, its derivatives, compactly supported primitives, and
the scaled families used in the space-time integral identities.

The cutoff is the canonical bump quotient
``chi(t) = E(1-t) / (E(1-t) + E(t-1/2))`` with ``E(s) = exp(-1/s)`` for s > 0
and 0 otherwise: identically 1 on [0, 1/2], identically 0 on [1, inf), C-inf
and strictly decreasing in between, reproducible bit for bit.  Powers
``psi = chi^(m p')`` are differentiated symbolically; primitives of negative
order are represented piecewise as exact antiderivatives of a Chebyshev
interpolant of the transition, so arbitrarily deep primitives stay cheap.
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Union

import numpy as np
import sympy
from numpy.polynomial.chebyshev import Chebyshev
from numpy.polynomial.polynomial import Polynomial

# Derivative expressions carry factors exp(k/(1-t)); beyond this guard the
# true values sit below exp(-45) while naive evaluation can overflow, so the
# band is clipped and 0 returned (exact to double precision).
_EDGE_GUARD = 0.02
_INTERP_TOL = 1e-12
_INTERP_DEGREES = (64, 128, 256, 384)


def chi(t) -> np.ndarray:
    """The fixed smooth transition: 1 on [0, 1/2], 0 on [1, inf)."""
    t = np.asarray(t, dtype=float)
    out = np.zeros(t.shape)
    out[t <= 0.5] = 1.0
    band = (t > 0.5) & (t < 1.0)
    tb = t[band]
    up = np.exp(-1.0 / (1.0 - tb))
    down = np.exp(-1.0 / (tb - 0.5))
    out[band] = up / (up + down)
    return out


def chi_reversed(t) -> np.ndarray:
    """The increasing partner transition; chi + chi_reversed = 1 on [1/2, 1]."""
    t = np.asarray(t, dtype=float)
    return 1.0 - chi(t)


@dataclass(frozen=True)
class TestFunctionFamily:
    """Cutoff family psi = chi^(m p') with its scaling parameters.

    ``eta`` is the exact time-scaling exponent, ``R`` the scaling radius; the
    canonical support endpoint before scaling is T = 1.
    """

    m: int
    p: float
    eta: Fraction = Fraction(0)
    R: float = 1.0
    T: float = 1.0

    def __post_init__(self):
        if self.m < 1:
            raise ValueError("m must be >= 1")
        if not self.p > 1:
            raise ValueError("p must exceed 1")
        if self.R < 1:
            raise ValueError("R must be >= 1")
        if Fraction(self.eta) < 0:
            raise ValueError("eta must be >= 0")
        if self.T != 1.0:
            raise ValueError("the unscaled support endpoint is fixed at T = 1")

    @property
    def p_prime(self) -> float:
        return self.p / (self.p - 1.0)

    @property
    def exponent(self) -> float:
        return self.m * self.p_prime

    @property
    def scaled_support_end(self) -> float:
        return self.R ** float(self.eta) * self.T


@functools.lru_cache(maxsize=None)
def _derivative_callable(exponent: float, order: int):
    t = sympy.symbols("t")
    up = sympy.exp(-1 / (1 - t))
    down = sympy.exp(-1 / (t - sympy.Rational(1, 2)))
    expr = (up / (up + down)) ** sympy.Float(exponent, 17)
    return sympy.lambdify(t, sympy.diff(expr, t, order), modules="numpy")


@dataclass(frozen=True)
class _PiecewisePrimitive:
    """Primitive represented as a polynomial on [0, 1/2] (extended left) and a
    Chebyshev series on [1/2, 1], identically zero beyond t = 1."""

    poly_low: Polynomial
    cheb_high: Chebyshev

    def __call__(self, t) -> np.ndarray:
        t = np.asarray(t, dtype=float)
        out = np.zeros(t.shape)
        low = t < 0.5
        mid = (t >= 0.5) & (t < 1.0)
        out[low] = self.poly_low(t[low])
        out[mid] = self.cheb_high(t[mid])
        return out

    def antiderivative_vanishing_at_one(self) -> "_PiecewisePrimitive":
        big = self.cheb_high.integ()
        cheb_new = big - big(1.0)
        poly_int = self.poly_low.integ()
        poly_new = poly_int - poly_int(0.5) + cheb_new(0.5)
        return _PiecewisePrimitive(poly_low=poly_new, cheb_high=cheb_new)


@functools.lru_cache(maxsize=None)
def _transition_interpolant(exponent: float) -> Chebyshev:
    def target(tt):
        return chi(tt) ** exponent

    probe = np.linspace(0.5, 1.0, 3001)
    last = None
    for degree in _INTERP_DEGREES:
        fit = Chebyshev.interpolate(target, degree, domain=[0.5, 1.0])
        err = float(np.max(np.abs(fit(probe) - target(probe))))
        last = fit
        if err < _INTERP_TOL:
            return fit
    return last


@functools.lru_cache(maxsize=None)
def _primitive_table(exponent: float, depth: int) -> tuple:
    base = _PiecewisePrimitive(
        poly_low=Polynomial([1.0]), cheb_high=_transition_interpolant(exponent)
    )
    table = []
    current = base
    for _ in range(depth):
        # psi^(j) = -int_t^1 psi^(j+1): the sign flip makes it the
        # antiderivative vanishing at the support endpoint
        current = current.antiderivative_vanishing_at_one()
        table.append(current)
    return tuple(table)


def psi_derivative(fam: TestFunctionFamily, order: int, t) -> np.ndarray:
    """Derivative (order > 0), value (order 0) or compactly supported
    primitive (order < 0) of psi = chi^(m p') at unscaled time t.

    All primitives vanish identically for t >= 1; positive orders vanish on
    the plateau [0, 1/2] and beyond the support.
    """
    if abs(order) > fam.m:
        raise ValueError(f"|order| must not exceed m = {fam.m}")
    t = np.asarray(t, dtype=float)
    scalar = t.ndim == 0
    t = np.atleast_1d(t)

    if order == 0:
        out = chi(t) ** fam.exponent
    elif order > 0:
        out = np.zeros(t.shape)
        band = (t > 0.5 + _EDGE_GUARD) & (t < 1.0 - _EDGE_GUARD)
        if np.any(band):
            with np.errstate(over="ignore", invalid="ignore"):
                vals = _derivative_callable(fam.exponent, order)(t[band])
            out[band] = np.nan_to_num(vals, nan=0.0, posinf=0.0, neginf=0.0)
    else:
        out = _primitive_table(fam.exponent, fam.m)[-order - 1](t)
    return out[0] if scalar else out


def scaled_psi(fam: TestFunctionFamily, order: int, t) -> np.ndarray:
    """Scaled family value ``R^(-order eta) psi^(order)(R^-eta t)``."""
    eta = float(Fraction(fam.eta))
    factor = fam.R ** (-order * eta)
    return factor * psi_derivative(fam, order, np.asarray(t, dtype=float) * fam.R**-eta)


def check_aaa_bound(fam: TestFunctionFamily, order: int, samples: int = 2000):
    """Smallest constant C with ``|psi^(order)| <= C psi^(1/p)`` on a dense
    sample of the support, and whether it is finite.

    For order 0 the constant is exactly 1 (psi <= 1); for negative orders the
    primitives are dominated by psi itself, so C <= 1 as well.
    """
    ts = np.linspace(0.0, 1.0, samples, endpoint=False)
    base = psi_derivative(fam, 0, ts)
    deriv = psi_derivative(fam, order, ts)
    # primitives carry an absolute error floor around 1e-13, so ratios are
    # only meaningful where the denominator clears that floor
    meaningful = base ** (1.0 / fam.p) > 1e-8
    ratios = np.abs(deriv[meaningful]) / base[meaningful] ** (1.0 / fam.p)
    c_est = float(np.max(ratios))
    return c_est, bool(np.isfinite(c_est))


def phi_scaled(q: Union[Fraction, float], R: float, x) -> np.ndarray:
    """Spatial profile ``<x/R>^-q``; x is a point (last axis = coordinates)."""
    if R < 1:
        raise ValueError("R must be >= 1")
    x = np.asarray(x, dtype=float)
    r2 = x**2 if x.ndim == 0 else np.sum(x**2, axis=-1)
    return (1.0 + r2 / R**2) ** (-float(q) / 2.0)


def hoelder_exponents(spec, p: Fraction, eta: Fraction) -> dict:
    """Exact per-term scaling exponents ``-(j - ell) eta - omega_j + (n + eta)/p'``.

    These are the powers of the scaling radius multiplying each term of the
    integral identity after the Hoelder step; all of them are negative when p
    sits below the critical power and eta is the optimal scaling.
    """
    p = Fraction(p)
    eta = Fraction(eta)
    if p <= 1:
        raise ValueError("p must exceed 1")
    p_prime = p / (p - 1)
    n = Fraction(spec.n)
    return {
        term.j: -(term.j - spec.ell) * eta - term.omega + (n + eta) / p_prime
        for term in spec.terms
    }
