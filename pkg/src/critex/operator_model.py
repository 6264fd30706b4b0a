"""Exact data model of the evolution operators handled by the package.

An operator acts on functions of ``(t, x)`` with ``x`` in n dimensions and has
the shape ``d^m/dt^m + sum_j a_j (-Laplacian)^(omega_j / 2) d^j/dt^j`` with
rational coefficients ``a_j`` and rational spatial orders ``omega_j >= 0``.
The forcing is the power ``|d^ell/dt^ell u|^p``.  Spatial orders are stored
doubled (``omega = 2 sigma`` for a Laplacian power ``sigma``) so the same
envelope engine covers the purely integer-order variant, where ``omega``
plays the role of the number of space derivatives.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Mapping, Optional, Union

from .exact import format_rational, parse_rational

MODE_FRACTIONAL = "fractional"
MODE_INTEGER = "integer"
_MODES = (MODE_FRACTIONAL, MODE_INTEGER)


class OperatorValidationError(ValueError):
    """Raised when an operator description violates the model invariants."""


class NoFractionalTermError(ValueError):
    """Raised when an operation requires a non-integer Laplacian power."""


class MissingDataIntegralError(ValueError):
    """Raised when the sign condition needs an integral that was not given."""


@dataclass(frozen=True)
class OperatorTerm:
    """One term ``a * (-Laplacian)^(omega/2) d^j/dt^j`` of the operator."""

    j: int
    a: Fraction
    omega: Fraction

    def __post_init__(self):
        if self.omega < 0:
            raise OperatorValidationError(f"negative spatial order for j={self.j}")

    @property
    def sigma(self) -> Fraction:
        return self.omega / 2


@dataclass(frozen=True)
class OperatorSpec:
    """Validated operator: dimension, time order, forcing index and terms.

    ``terms`` always contains the leading term ``(j=m, a=1, omega=0)`` and is
    sorted by ``j``; terms with zero coefficient are dropped on construction
    via :meth:`create`.
    """

    n: int
    m: int
    ell: int
    terms: tuple[OperatorTerm, ...]
    mode: str = MODE_FRACTIONAL

    def __post_init__(self):
        if self.n < 1:
            raise OperatorValidationError("space dimension n must be >= 1")
        if self.m < 1:
            raise OperatorValidationError("time order m must be >= 1")
        if not 0 <= self.ell <= self.m - 1:
            raise OperatorValidationError(
                f"forcing index ell={self.ell} outside [0, {self.m - 1}]"
            )
        if self.mode not in _MODES:
            raise OperatorValidationError(f"unknown mode: {self.mode!r}")
        seen = set()
        for term in self.terms:
            if not 0 <= term.j <= self.m:
                raise OperatorValidationError(f"term j={term.j} outside [0, {self.m}]")
            if term.j in seen:
                raise OperatorValidationError(f"duplicate term j={term.j}")
            if term.a == 0:
                raise OperatorValidationError(
                    f"zero-coefficient term j={term.j} must be dropped before construction"
                )
            if self.mode == MODE_INTEGER and term.omega.denominator != 1:
                raise OperatorValidationError(
                    f"integer mode requires integer spatial orders, got {term.omega} at j={term.j}"
                )
            seen.add(term.j)
        if self.m not in seen:
            raise OperatorValidationError("leading term j=m is missing")
        lead = self.term(self.m)
        if lead.a != 1 or lead.omega != 0:
            raise OperatorValidationError("leading term must have a=1 and omega=0")
        if list(t.j for t in self.terms) != sorted(seen):
            raise OperatorValidationError("terms must be sorted by j")

    @classmethod
    def create(
        cls,
        n: int,
        m: int,
        ell: int,
        terms: Iterable[OperatorTerm],
        mode: str = MODE_FRACTIONAL,
    ) -> "OperatorSpec":
        """Build a spec from raw terms: drop a=0 terms, add the implied j=m term."""
        kept = {}
        for term in terms:
            if term.j in kept:
                raise OperatorValidationError(f"duplicate term j={term.j}")
            if term.a == 0:
                continue
            kept[term.j] = term
        if m not in kept:
            kept[m] = OperatorTerm(j=m, a=Fraction(1), omega=Fraction(0))
        ordered = tuple(kept[j] for j in sorted(kept))
        return cls(n=n, m=m, ell=ell, terms=ordered, mode=mode)

    def term(self, j: int) -> Optional[OperatorTerm]:
        for t in self.terms:
            if t.j == j:
                return t
        return None

    @property
    def active_js(self) -> tuple[int, ...]:
        return tuple(t.j for t in self.terms)


def parse_operator(document: Union[str, bytes, Mapping]) -> OperatorSpec:
    """Parse the canonical operator JSON into a validated spec.

    Schema: ``{"n": int, "m": int, "ell": int, "mode": "fractional"|"integer",
    "terms": [{"j": int, "a": "p/q", "omega": "p/q"}, ...]}`` where rationals
    are strings or plain ints.  The ``j=m`` term may be omitted and is implied.
    """
    if isinstance(document, (str, bytes)):
        try:
            document = json.loads(document)
        except json.JSONDecodeError as exc:
            raise OperatorValidationError(f"invalid JSON: {exc}") from exc
    if not isinstance(document, Mapping):
        raise OperatorValidationError("operator document must be a JSON object")

    def _int_field(name):
        value = document.get(name)
        if not isinstance(value, int) or isinstance(value, bool):
            raise OperatorValidationError(f"field {name!r} must be an integer")
        return value

    n = _int_field("n")
    m = _int_field("m")
    ell = _int_field("ell")
    mode = document.get("mode", MODE_FRACTIONAL)
    raw_terms = document.get("terms", [])
    if not isinstance(raw_terms, list):
        raise OperatorValidationError("field 'terms' must be a list")
    terms = []
    for entry in raw_terms:
        if not isinstance(entry, Mapping):
            raise OperatorValidationError("each term must be a JSON object")
        j = entry.get("j")
        if not isinstance(j, int) or isinstance(j, bool):
            raise OperatorValidationError("term field 'j' must be an integer")
        try:
            a = parse_rational(entry.get("a", "1"))
            omega = parse_rational(entry.get("omega", "0"))
        except ValueError as exc:
            raise OperatorValidationError(str(exc)) from exc
        if omega < 0:
            raise OperatorValidationError(f"negative spatial order for j={j}")
        terms.append(OperatorTerm(j=j, a=a, omega=omega))
    return OperatorSpec.create(n=n, m=m, ell=ell, terms=terms, mode=mode)


def serialize_operator(spec: OperatorSpec) -> dict:
    """Canonical JSON form; the implied j=m term is omitted."""
    return {
        "n": spec.n,
        "m": spec.m,
        "ell": spec.ell,
        "mode": spec.mode,
        "terms": [
            {"j": t.j, "a": format_rational(t.a), "omega": format_rational(t.omega)}
            for t in spec.terms
            if t.j != spec.m
        ],
    }


def fractional_part_s(spec: OperatorSpec) -> Fraction:
    """Smallest fractional part among the non-integer Laplacian powers.

    Only terms with nonzero coefficient count.  Raises
    :class:`NoFractionalTermError` when every power is an integer.
    """
    parts = []
    for term in spec.terms:
        sigma = term.sigma
        frac = sigma - math.floor(sigma)
        if frac != 0:
            parts.append(frac)
    if not parts:
        raise NoFractionalTermError("operator has no non-integer Laplacian power")
    return min(parts)


def weight_exponent_q(spec: OperatorSpec) -> Fraction:
    """Decay exponent of the spatial test function: ``n + 2 s``."""
    return Fraction(spec.n) + 2 * fractional_part_s(spec)


def index_set_I(spec: OperatorSpec) -> frozenset:
    """Indices ``j`` in ``[ell, m-1]`` whose successor term is a plain multiple
    of the identity (zero spatial order, nonzero coefficient)."""
    out = set()
    for j in range(spec.ell, spec.m):
        nxt = spec.term(j + 1)
        if nxt is not None and nxt.omega == 0:
            out.add(j)
    return frozenset(out)


# Initial-data descriptors.  The sign condition only needs the integrals, so
# the model keeps symbolic profiles; actual grids live in the simulator.

WEIGHT_PLAIN = "L1"
WEIGHT_DECAY = "L1-weighted"


@dataclass(frozen=True)
class DataProfile:
    """Symbolic description of one initial datum u_j."""

    kind: str = "zero"
    integral: Union[Fraction, float, None] = Fraction(0)
    weight_class: str = WEIGHT_PLAIN
    params: tuple = ()

    @classmethod
    def zero(cls) -> "DataProfile":
        return cls(kind="zero", integral=Fraction(0))


@dataclass(frozen=True)
class DataSpec:
    """Initial data u_j for j in [ell, m-1]; indices below ell are zero."""

    profiles: Mapping[int, DataProfile] = field(default_factory=dict)

    def profile(self, j: int) -> DataProfile:
        return self.profiles.get(j, DataProfile.zero())


def check_sign_condition(spec: OperatorSpec, data: DataSpec):
    """Signed sum ``sum_{j in I} a_{j+1} * integral(u_j)`` and its positivity.

    Returns ``(value, value > 0)``.  The value stays a Fraction when every
    integral involved is exact.
    """
    total = Fraction(0)
    for j in sorted(index_set_I(spec)):
        profile = data.profile(j)
        if profile.integral is None:
            raise MissingDataIntegralError(f"u_{j} has no integral but j is in I")
        total = total + spec.term(j + 1).a * profile.integral
    return total, total > 0


# Convenience constructors for the families used throughout the tests and the
# fixture corpus.


def heat_operator(n: int, sigma: Fraction) -> OperatorSpec:
    """d/dt + (-Laplacian)^sigma with forcing |u|^p."""
    return OperatorSpec.create(
        n=n,
        m=1,
        ell=0,
        terms=[OperatorTerm(0, Fraction(1), 2 * Fraction(sigma))],
    )


def second_order_operator(
    n: int,
    sigma: Fraction,
    sigma1: Optional[Fraction] = None,
    ell: int = 0,
    a1: Fraction = Fraction(1),
) -> OperatorSpec:
    """d2/dt2 [+ a1 (-Laplacian)^sigma1 d/dt] + (-Laplacian)^sigma."""
    terms = [OperatorTerm(0, Fraction(1), 2 * Fraction(sigma))]
    if sigma1 is not None and a1 != 0:
        terms.append(OperatorTerm(1, Fraction(a1), 2 * Fraction(sigma1)))
    return OperatorSpec.create(n=n, m=2, ell=ell, terms=terms)
