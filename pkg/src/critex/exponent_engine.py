"""Critical exponent computation via exact lower envelopes of scaling lines.

Each operator term contributes the line ``eta -> (j - ell) * eta + omega_j``
describing how that term scales when time is contracted by ``R^-eta`` and
space by ``R^-1``.  The pointwise minimum ``g`` of these lines, and the
derived profile ``h(eta) = (n + eta) / max(n + eta - g(eta), 0)`` (with
``1/0 = inf``), determine the critical power ``p_c = max h`` over the extended
half line.  Everything on the main path is exact rational arithmetic; a
floating-point grid oracle is provided as an independent cross-check.
"""

from __future__ import annotations

import bisect
from dataclasses import dataclass, replace
from fractions import Fraction
from typing import Optional

import numpy as np

from .exact import (
    POS_INF,
    NEG_INF,
    ExtendedRational,
    format_extended,
    format_rational,
    is_pos_inf,
)
from .operator_model import (
    NoFractionalTermError,
    OperatorSpec,
    fractional_part_s,
    index_set_I,
    weight_exponent_q,
)

OUTCOME_FINITE = "finite"
OUTCOME_INFINITE = "infinite"
OUTCOME_INFINITE_BOUNDARY = "infinite-boundary-case"
OUTCOME_NO_RESULT = "no-nonexistence-result"


@dataclass(frozen=True)
class EnvelopeLine:
    """One scaling line ``eta -> slope * eta + intercept``."""

    slope: Fraction
    intercept: Fraction
    source_j: int

    def value_at(self, eta: Fraction) -> Fraction:
        return self.slope * eta + self.intercept


@dataclass(frozen=True)
class EnvelopePiece:
    eta_start: Fraction
    line: EnvelopeLine


@dataclass(frozen=True)
class Envelope:
    """Lower envelope as ordered pieces; the last piece extends to infinity.

    Along the pieces the source index strictly decreases and the intercept
    strictly increases; both facts are enforced here.
    """

    pieces: tuple[EnvelopePiece, ...]

    def __post_init__(self):
        if not self.pieces:
            raise ValueError("envelope needs at least one piece")
        if self.pieces[0].eta_start != 0:
            raise ValueError("first piece must start at eta = 0")
        for prev, cur in zip(self.pieces, self.pieces[1:]):
            if cur.eta_start <= prev.eta_start:
                raise ValueError("breakpoints must increase strictly")
            if cur.line.slope >= prev.line.slope:
                raise ValueError("piece slopes must decrease strictly")
            if cur.line.intercept <= prev.line.intercept:
                raise ValueError("piece intercepts must increase strictly")

    @property
    def breakpoints(self) -> tuple[tuple[Fraction, int], ...]:
        return tuple((p.eta_start, p.line.source_j) for p in self.pieces)

    def piece_at(self, eta: Fraction) -> EnvelopePiece:
        starts = [p.eta_start for p in self.pieces]
        idx = bisect.bisect_right(starts, eta) - 1
        return self.pieces[max(idx, 0)]


@dataclass(frozen=True)
class ExponentReport:
    """Result record: critical power, optimal scaling and envelope structure.

    ``p_c`` is a Fraction (with the sentinel value 1 meaning that no
    nonexistence range exists) or ``inf``.  When ``1 < p_c < inf`` the optimal
    scaling ``eta_opt`` is a breakpoint and ``principal_js`` lists the term
    indices attaining the envelope there.
    """

    p_c: ExtendedRational
    eta_opt: Optional[ExtendedRational]
    envelope: Envelope
    signs: tuple[int, ...]
    principal_js: frozenset
    outcome: str
    classification: str = "generic"
    q: Optional[Fraction] = None
    s: Optional[Fraction] = None
    index_set: frozenset = frozenset()


def envelope_lines(spec: OperatorSpec) -> list[EnvelopeLine]:
    """Scaling lines of the active terms.

    Distinct term indices give distinct slopes, so the tie rules (minimal
    intercept per slope, then smallest index) are defensive only.
    """
    by_slope: dict[Fraction, EnvelopeLine] = {}
    for term in spec.terms:
        line = EnvelopeLine(
            slope=Fraction(term.j - spec.ell),
            intercept=term.omega,
            source_j=term.j,
        )
        old = by_slope.get(line.slope)
        if old is None or (line.intercept, line.source_j) < (old.intercept, old.source_j):
            by_slope[line.slope] = line
    return sorted(by_slope.values(), key=lambda l: l.slope)


def lower_envelope(spec: OperatorSpec) -> Envelope:
    """Exact lower envelope of the scaling lines over ``[0, inf)``."""
    lines = envelope_lines(spec)
    w_min = min(l.intercept for l in lines)
    current = min(
        (l for l in lines if l.intercept == w_min), key=lambda l: l.slope
    )
    pieces = [EnvelopePiece(Fraction(0), current)]
    while True:
        best = None
        for cand in lines:
            if cand.slope >= current.slope:
                continue
            eta_star = (cand.intercept - current.intercept) / (
                current.slope - cand.slope
            )
            key = (eta_star, cand.slope)
            if best is None or key < best[0]:
                best = (key, cand)
        if best is None:
            break
        pieces.append(EnvelopePiece(best[0][0], best[1]))
        current = best[1]
    return Envelope(tuple(pieces))


def g_eval(env: Envelope, eta: ExtendedRational) -> ExtendedRational:
    """Exact envelope value; at ``eta = inf`` the limit of the last piece."""
    if is_pos_inf(eta):
        last = env.pieces[-1].line
        if last.slope > 0:
            return POS_INF
        if last.slope < 0:
            return NEG_INF
        return last.intercept
    eta = Fraction(eta)
    if eta < 0:
        raise ValueError("eta must be >= 0")
    return env.piece_at(eta).line.value_at(eta)


def h_eval(
    spec: OperatorSpec, eta: ExtendedRational, env: Optional[Envelope] = None
) -> ExtendedRational:
    """Exponent profile ``(n + eta) / (n + eta - g(eta))_+`` with ``1/0 = inf``."""
    if env is None:
        env = lower_envelope(spec)
    n = Fraction(spec.n)
    if is_pos_inf(eta):
        j_last = env.pieces[-1].line.source_j
        if j_last <= spec.ell:
            return Fraction(1, spec.ell + 1 - j_last)
        return POS_INF
    g = g_eval(env, eta)
    denom = n + Fraction(eta) - g
    if denom <= 0:
        return POS_INF
    return (n + Fraction(eta)) / denom


def _sign(value: Fraction) -> int:
    return (value > 0) - (value < 0)


def _piece_signs(spec: OperatorSpec, env: Envelope) -> tuple[int, ...]:
    """Sign of the slope of h on each piece: sign(n (j_k - ell) - omega_{j_k})."""
    n = Fraction(spec.n)
    return tuple(
        _sign(n * (p.line.source_j - spec.ell) - p.line.intercept)
        for p in env.pieces
    )


def _first_crossing(env: Envelope, n: Fraction) -> Optional[Fraction]:
    """Smallest eta >= 0 with g(eta) - eta = n, or None if never reached."""
    for k, piece in enumerate(env.pieces):
        start = piece.eta_start
        end = env.pieces[k + 1].eta_start if k + 1 < len(env.pieces) else None
        slope = piece.line.slope - 1
        offset = piece.line.intercept
        if slope == 0:
            if offset == n:
                return start
            continue
        eta = (n - offset) / slope
        if eta >= start and (end is None or eta < end):
            return eta
    return None


def critical_exponent(spec: OperatorSpec) -> ExponentReport:
    """Maximize h over the extended half line, exactly.

    The infinite outcome is detected before any maximization: either the
    lowest active time index exceeds the forcing index, or the concave map
    ``g(eta) - eta`` reaches the space dimension (equality is reported as a
    boundary case).  Otherwise, if the flattest zero-order line has index at
    most ``ell`` the profile never rises above 1 and there is no nonexistence
    range.  In the remaining case the maximum sits at the unique breakpoint
    where the piece signs flip from +1 to -1.
    """
    env = lower_envelope(spec)
    n = Fraction(spec.n)
    signs = _piece_signs(spec, env)
    try:
        s = fractional_part_s(spec)
        q = weight_exponent_q(spec)
    except NoFractionalTermError:
        s = None
        q = None
    iset = index_set_I(spec)

    def finalize(report: ExponentReport) -> ExponentReport:
        return replace(report, classification=classify(report, spec))

    base = dict(envelope=env, signs=signs, q=q, s=s, index_set=iset)

    j_last = env.pieces[-1].line.source_j
    if j_last >= spec.ell + 1:
        eta_opt = _first_crossing(env, n)
        return finalize(
            ExponentReport(
                p_c=POS_INF,
                eta_opt=POS_INF if eta_opt is None else eta_opt,
                principal_js=frozenset(),
                outcome=OUTCOME_INFINITE,
                **base,
            )
        )

    # Last piece of g(eta) - eta now has slope <= -1, so its maximum is
    # attained at a breakpoint.
    excess = max(g_eval(env, p.eta_start) - p.eta_start for p in env.pieces)
    if excess >= n:
        eta_opt = _first_crossing(env, n)
        outcome = OUTCOME_INFINITE if excess > n else OUTCOME_INFINITE_BOUNDARY
        return finalize(
            ExponentReport(
                p_c=POS_INF,
                eta_opt=eta_opt,
                principal_js=frozenset(),
                outcome=outcome,
                **base,
            )
        )

    j_first = env.pieces[0].line.source_j
    if j_first <= spec.ell:
        return finalize(
            ExponentReport(
                p_c=Fraction(1),
                eta_opt=None,
                principal_js=frozenset(),
                outcome=OUTCOME_NO_RESULT,
                **base,
            )
        )

    if any(sk == 0 for sk in signs):
        raise RuntimeError("zero piece sign cannot occur for a finite p_c > 1")
    k_star = next(k for k, sk in enumerate(signs) if sk == -1)
    eta_opt = env.pieces[k_star].eta_start
    p_c = h_eval(spec, eta_opt, env)
    candidates = [h_eval(spec, Fraction(0), env)]
    candidates += [h_eval(spec, p.eta_start, env) for p in env.pieces[1:]]
    candidates.append(h_eval(spec, POS_INF, env))
    if p_c != max(candidates):
        raise RuntimeError("sign-transition maximum disagrees with direct maximum")
    g_opt = g_eval(env, eta_opt)
    principal = frozenset(
        t.j
        for t in spec.terms
        if Fraction(t.j - spec.ell) * eta_opt + t.omega == g_opt
    )
    return finalize(
        ExponentReport(
            p_c=p_c,
            eta_opt=eta_opt,
            principal_js=principal,
            outcome=OUTCOME_FINITE,
            **base,
        )
    )


def brute_force_pc(
    spec: OperatorSpec,
    eta_max: Fraction,
    steps: int,
    refine_rounds: int = 2,
    unbounded_cap: float = 1e6,
) -> tuple[float, float]:
    """Floating-point grid maximization of h; cross-check only.

    Scans a uniform grid on ``[0, eta_max]`` plus the limit at infinity.  The
    optional refinement rounds re-grid a shrinking window around the running
    argmax (the profile is unimodal when the maximum is finite), so the
    default settings resolve the maximum far below the 1e-3 oracle tolerance.
    Returns ``(inf, eta)`` as soon as any grid value exceeds ``unbounded_cap``.
    """
    if steps < 1000:
        raise ValueError("steps must be >= 1000")
    slopes = np.array([float(t.j - spec.ell) for t in spec.terms])
    intercepts = np.array([float(t.omega) for t in spec.terms])
    n = float(spec.n)

    def h_on(etas: np.ndarray) -> np.ndarray:
        g = np.min(slopes[:, None] * etas[None, :] + intercepts[:, None], axis=0)
        denom = n + etas - g
        with np.errstate(divide="ignore", over="ignore"):
            vals = np.where(denom > 0, (n + etas) / np.maximum(denom, 1e-300), np.inf)
        return vals

    lo, hi = 0.0, float(eta_max)
    best_p, best_eta = -np.inf, 0.0
    for _ in range(refine_rounds + 1):
        etas = np.linspace(lo, hi, steps + 1)
        vals = h_on(etas)
        k = int(np.argmax(vals))
        if vals[k] > best_p:
            best_p, best_eta = float(vals[k]), float(etas[k])
        if best_p > unbounded_cap:
            return POS_INF, best_eta
        delta = (hi - lo) / steps
        lo = max(0.0, etas[k] - 2 * delta)
        hi = min(float(eta_max), etas[k] + 2 * delta)
        if hi <= lo:
            break

    slope_min = slopes.min()
    if slope_min >= 1.0:
        return POS_INF, float(eta_max)
    limit = 1.0 / (1.0 - slope_min)
    if limit > best_p:
        best_p, best_eta = limit, float(eta_max)
    return best_p, best_eta


CLASS_CLASSICAL = "classical-damping"
CLASS_EFFECTIVE = "effective"
CLASS_NONEFFECTIVE = "noneffective"
CLASS_QUASIHOM = "quasi-homogeneous-limit"
CLASS_GENERIC = "generic"


def classify(report: ExponentReport, spec: OperatorSpec) -> str:
    """Damping label for second-order models with all three terms present.

    Compares twice the damping order with the leading spatial order; anything
    that is not a full second-order damped model is labelled generic.
    """
    if spec.m != 2 or set(spec.active_js) != {0, 1, 2}:
        return CLASS_GENERIC
    omega1 = spec.term(1).omega
    omega0 = spec.term(0).omega
    if omega0 == 0:
        return CLASS_GENERIC
    if omega1 == 0:
        return CLASS_CLASSICAL
    if 2 * omega1 < omega0:
        return CLASS_EFFECTIVE
    if 2 * omega1 > omega0:
        return CLASS_NONEFFECTIVE
    return CLASS_QUASIHOM


def report_to_dict(report: ExponentReport) -> dict:
    """Report in the canonical JSON layout (rationals as ``p/q`` strings)."""
    p_c = format_extended(report.p_c)
    return {
        "p_c": p_c,
        "eta_opt": format_extended(report.eta_opt),
        "breakpoints": [
            [format_rational(eta), j] for eta, j in report.envelope.breakpoints
        ],
        "signs": list(report.signs),
        "J_p": sorted(report.principal_js),
        "q": None if report.q is None else format_rational(report.q),
        "s": None if report.s is None else format_rational(report.s),
        "I": sorted(report.index_set),
        "classification": report.classification,
        "outcome": report.outcome,
    }
