import math
import random
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from critex.exact import POS_INF, is_pos_inf
from critex.exponent_engine import (
    OUTCOME_FINITE,
    OUTCOME_INFINITE,
    OUTCOME_INFINITE_BOUNDARY,
    OUTCOME_NO_RESULT,
    brute_force_pc,
    classify,
    critical_exponent,
    g_eval,
    h_eval,
    lower_envelope,
    report_to_dict,
)
from critex.operator_model import heat_operator, second_order_operator

from conftest import make_operator, make_quasihomogeneous, random_operator


def breakpoints(spec):
    return [(eta, j) for eta, j in lower_envelope(spec).breakpoints]


class TestLowerEnvelope:
    def test_heat(self):
        spec = heat_operator(1, Fraction(1))
        assert breakpoints(spec) == [(0, 1), (2, 0)]

    def test_damped_effective(self):
        spec = second_order_operator(1, Fraction(2), Fraction(1, 2))
        assert breakpoints(spec) == [(0, 2), (1, 1), (3, 0)]

    def test_single_line(self):
        spec = make_operator(1, 1, 0, [])
        env = lower_envelope(spec)
        assert breakpoints(spec) == [(0, 1)]
        assert env.pieces[0].line.slope == 1

    def test_monotone_structure_random(self, rng):
        for _ in range(300):
            env = lower_envelope(random_operator(rng))
            js = [p.line.source_j for p in env.pieces]
            ws = [p.line.intercept for p in env.pieces]
            assert js == sorted(js, reverse=True) and len(set(js)) == len(js)
            assert ws == sorted(ws) and len(set(ws)) == len(ws)


class TestGEval:
    def test_heat_values(self):
        env = lower_envelope(heat_operator(1, Fraction(1)))
        assert g_eval(env, Fraction(1)) == 1
        assert g_eval(env, Fraction(5)) == 2
        assert g_eval(env, Fraction(0)) == 0

    def test_limits_at_infinity(self):
        env = lower_envelope(heat_operator(1, Fraction(1)))
        assert g_eval(env, POS_INF) == 2  # flat last piece
        env = lower_envelope(make_operator(1, 1, 0, []))
        assert is_pos_inf(g_eval(env, POS_INF))
        env = lower_envelope(make_operator(1, 2, 1, [(0, 1, 2)]))
        assert g_eval(env, POS_INF) == -math.inf

    @given(st.data())
    @settings(max_examples=60, deadline=None)
    def test_matches_direct_minimum(self, data):
        seed = data.draw(st.integers(0, 10**9))
        spec = random_operator(random.Random(seed))
        env = lower_envelope(spec)
        eta = data.draw(
            st.fractions(min_value=Fraction(0), max_value=Fraction(40), max_denominator=16)
        )
        direct = min(Fraction(t.j - spec.ell) * eta + t.omega for t in spec.terms)
        assert g_eval(env, eta) == direct


class TestHEval:
    def test_heat(self):
        spec = heat_operator(1, Fraction(1))
        assert h_eval(spec, Fraction(2)) == 3

    def test_damped_effective(self):
        spec = second_order_operator(3, Fraction(2), Fraction(1, 2))
        assert h_eval(spec, Fraction(3)) == 3

    def test_at_zero(self):
        for spec in (
            heat_operator(2, Fraction(3, 2)),
            second_order_operator(1, Fraction(2), Fraction(1, 2)),
        ):
            assert h_eval(spec, Fraction(0)) == 1


class TestCriticalExponent:
    def test_heat_fujita(self):
        report = critical_exponent(heat_operator(1, Fraction(1)))
        assert report.p_c == 3
        assert report.eta_opt == 2
        assert report.principal_js == {0, 1}
        assert report.outcome == OUTCOME_FINITE

    def test_second_order_no_damping(self):
        spec = second_order_operator(3, Fraction(2))
        report = critical_exponent(spec)
        assert report.p_c == 5
        assert report.eta_opt == 2

    def test_damped_ell1_effective(self):
        spec = second_order_operator(2, Fraction(2), Fraction(1, 2), ell=1)
        report = critical_exponent(spec)
        assert report.p_c == Fraction(3, 2)
        assert report.eta_opt == 1

    def test_infinite_when_lowest_index_is_ell_plus_one(self):
        spec = make_operator(1, 2, 0, [(1, 1, 3)])
        report = critical_exponent(spec)
        assert is_pos_inf(report.p_c)
        assert report.outcome == OUTCOME_INFINITE

    def test_classical_damping_time_derivative_forcing(self):
        spec = second_order_operator(2, Fraction(1), Fraction(0), ell=1)
        report = critical_exponent(spec)
        assert report.p_c == 1
        assert report.outcome == OUTCOME_NO_RESULT
        assert report.eta_opt is None

    def test_quasihomogeneous_triple_point(self):
        spec = make_operator(3, 2, 0, [(0, 1, 2), (1, 2, 1)])
        report = critical_exponent(spec)
        assert report.p_c == 2
        assert report.eta_opt == 1
        assert report.principal_js == {0, 1, 2}

    def test_boundary_case_flag(self):
        # max of g(eta) - eta equals n exactly on an interior piece
        spec = make_operator(3, 3, 1, [(0, 1, 20), (1, 1, 16), (2, 1, 3)])
        report = critical_exponent(spec)
        assert is_pos_inf(report.p_c)
        assert report.outcome == OUTCOME_INFINITE_BOUNDARY

    def test_signs_structure_when_finite(self, rng):
        seen = 0
        while seen < 100:
            spec = random_operator(rng)
            report = critical_exponent(spec)
            signs = list(report.signs)
            assert signs == sorted(signs, reverse=True)
            if report.outcome != OUTCOME_FINITE or report.p_c == 1:
                continue
            seen += 1
            assert 0 not in signs
            assert signs[0] == 1 and signs[-1] == -1
            # the optimum is the breakpoint at the sign flip
            k = signs.index(-1)
            assert report.envelope.pieces[k].eta_start == report.eta_opt

    def test_principal_part_structure(self, rng):
        seen = 0
        while seen < 100:
            spec = random_operator(rng)
            report = critical_exponent(spec)
            if report.outcome != OUTCOME_FINITE or report.p_c == 1:
                continue
            seen += 1
            assert len(report.principal_js) >= 2
            assert min(report.principal_js) <= spec.ell
            if spec.ell == 0:
                assert 0 in report.principal_js
            k = report.signs.index(-1)
            pieces = report.envelope.pieces
            assert pieces[k].line.source_j in report.principal_js
            assert pieces[k - 1].line.source_j in report.principal_js

    def test_quasihomogeneous_argmax_invariance(self, rng):
        checked = 0
        while checked < 50:
            m_p = rng.randint(2, 4)
            ell = rng.randint(0, m_p - 1)
            n = rng.randint(1, 3)
            theta = Fraction(rng.randint(1, 12), 8)
            sigma = (m_p - ell) * theta
            if 2 * sigma >= n + 2 * theta:
                continue
            coeffs = {j: Fraction(0) for j in range(m_p)}
            coeffs[0] = Fraction(rng.choice([1, -1, 2]))
            for j in range(1, m_p):
                if rng.random() < 0.5:
                    coeffs[j] = Fraction(rng.choice([1, -1, 3]))
            spec = make_quasihomogeneous(n, m_p, ell, theta, coeffs)
            report = critical_exponent(spec)
            assert report.eta_opt == 2 * theta
            assert report.p_c == 1 + 2 * sigma / (n + 2 * theta - 2 * sigma)
            checked += 1


class TestBruteForce:
    def test_heat(self):
        p_hat, eta_hat = brute_force_pc(heat_operator(1, Fraction(1)), Fraction(10), 10**5)
        assert abs(p_hat - 3) <= 1e-4
        assert abs(eta_hat - 2) <= 1e-3

    def test_damped(self):
        spec = second_order_operator(3, Fraction(2), Fraction(1, 2))
        p_hat, _ = brute_force_pc(spec, Fraction(10), 10**5)
        assert abs(p_hat - 3) <= 1e-4

    def test_unbounded(self):
        spec = make_operator(1, 2, 0, [(1, 1, 3)])
        p_hat, _ = brute_force_pc(spec, Fraction(10), 10**4)
        assert is_pos_inf(p_hat)

    def test_oracle_agreement_smoke(self, rng):
        seen = 0
        while seen < 25:
            spec = random_operator(rng)
            report = critical_exponent(spec)
            if report.outcome != OUTCOME_FINITE:
                continue
            if not isinstance(report.eta_opt, Fraction) or report.eta_opt > 50:
                continue
            seen += 1
            p_hat, _ = brute_force_pc(spec, Fraction(60), 10**4)
            assert abs(p_hat - float(report.p_c)) <= 1e-3


class TestClassify:
    def test_effective(self):
        spec = second_order_operator(3, Fraction(2), Fraction(1, 2))
        assert critical_exponent(spec).classification == "effective"

    def test_noneffective(self):
        spec = second_order_operator(3, Fraction(2), Fraction(3, 2))
        assert critical_exponent(spec).classification == "noneffective"

    def test_quasihomogeneous_limit(self):
        spec = second_order_operator(3, Fraction(2), Fraction(1))
        assert critical_exponent(spec).classification == "quasi-homogeneous-limit"

    def test_classical(self):
        spec = second_order_operator(3, Fraction(2), Fraction(0))
        assert critical_exponent(spec).classification == "classical-damping"

    def test_generic(self):
        assert critical_exponent(heat_operator(1, Fraction(1))).classification == "generic"


def test_report_dict_layout():
    report = critical_exponent(second_order_operator(3, Fraction(2), Fraction(1, 2)))
    doc = report_to_dict(report)
    assert doc["p_c"] == "3"
    assert doc["eta_opt"] == "3"
    assert doc["breakpoints"] == [["0", 2], ["1", 1], ["3", 0]]
    assert doc["signs"] == [1, 1, -1]
    assert doc["J_p"] == [0, 1]
    assert doc["q"] == "4"
    assert doc["s"] == "1/2"
    assert doc["I"] == [1]
    assert doc["classification"] == "effective"
