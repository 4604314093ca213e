import cmath
import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, strategies as st

from conelab.arith import (euler_phi, factorize, gauss_iota, is_square, jacobi, legendre_character, real_characters,
                           squarefull_up_to)
from conelab.errors import EvenModulus, NotCoprime, ZeroDual
from conelab.expsums import (S0_value, S2_factor, SumContext, TruncationPolicy, char_average_A, creal_test,
                             eta_coefficient, partial_F, partial_F_series, partial_sum_S0, partial_sum_S0_series,
                             salie_T, sum_S1_closed, sum_S2, sum_Sq, theta_chi)
from conelab.quadform import PYTHAGOREAN, SQUARE_CONE, dual_eval

PY1 = SumContext(PYTHAGOREAN, 1, (0, 0, 0))
SQ1 = SumContext(SQUARE_CONE, 1, (0, 0, 0))
SQ3 = SumContext(SQUARE_CONE, 3, (1, 1, 1))
PY3 = SumContext(PYTHAGOREAN, 3, (0, 1, 1))


def e(k, m):
    return cmath.exp(2j * math.pi * k / m)


def literal_Sq(ctx, q, c):
    """The defining double sum, term by term."""
    L, lam, F = ctx.L, ctx.lam, ctx.form
    total = 0j
    M = q * L
    for s1 in range(M):
        for s2 in range(M):
            for s3 in range(M):
                v = (L * s1 + lam[0], L * s2 + lam[1], L * s3 + lam[2])
                f = F(v)
                if f % (L * L):
                    continue
                dot = c[0] * s1 + c[1] * s2 + c[2] * s3
                for a in range(1, q + 1):
                    if math.gcd(a, q) == 1:
                        total += e(a * (f // L) + dot, M)
    return total


def literal_S2(ctx, q2, x, c):
    L, F = ctx.L, ctx.form
    M = q2 * L * L
    xinv = pow(x, -1, L) if L > 1 else 0
    mu = [(xinv * v) % L for v in ctx.lam]
    total = 0j
    for a1 in range(M):
        for a2 in range(M):
            for a3 in range(M):
                al = (a1, a2, a3)
                if any((ai - mi) % L for ai, mi in zip(al, mu)):
                    continue
                f = F(al)
                if f % (L * L):
                    continue
                for a in range(1, q2 + 1):
                    if math.gcd(a, q2) == 1:
                        total += e(a * f + c[0] * a1 + c[1] * a2 + c[2] * a3, M)
    return total


def close(a, b, tol=1e-9):
    return abs(a - b) <= tol * max(1.0, abs(b))


vec3 = st.tuples(st.integers(-20, 20), st.integers(-20, 20), st.integers(-20, 20))


def test_Sq_prime_zero_pattern_examples():
    assert close(sum_Sq(PY1, 3, (0, 0, 0)), 0)
    assert close(sum_Sq(PY1, 9, (0, 0, 0)), 162)
    assert S0_value(PY1, 9) == 162 == 3 ** 5 * (1 - Fraction(1, 3))


def test_Sq_square_cone_q2_matches_literal():
    assert close(sum_Sq(SQ1, 2, (0, 0, 0)), literal_Sq(SQ1, 2, (0, 0, 0)))


@pytest.mark.parametrize("ctx", [PY1, SQ1, SQ3, PY3], ids=["py1", "sq1", "sq3", "py3"])
@pytest.mark.parametrize("c", [(0, 0, 0), (1, 0, 1), (2, -1, 3)])
def test_Sq_routes_match_literal(ctx, c):
    for q in range(1, 9 if ctx.L == 1 else 4):
        lit = literal_Sq(ctx, q, c)
        for method in ("direct", "reduced"):
            assert close(sum_Sq(ctx, q, c, method), lit, 1e-8)


def test_S1_closed_examples():
    assert sum_S1_closed(PY1, 1, 1, (4, 5, 6)) == 1
    assert close(sum_S1_closed(PY1, 3, 1, (0, 0, 0)), 0)
    # F*(1,0,0) = -4 and (4/5) = 1, so the value is iota_5^4 = 25
    val = sum_S1_closed(PY1, 5, 1, (1, 0, 0))
    assert close(val, gauss_iota(5) ** 3 * jacobi(4, 5) * gauss_iota(5))
    assert close(val, 25) and close(val, literal_Sq(PY1, 5, (1, 0, 0)), 1e-8)
    with pytest.raises(NotCoprime):
        sum_S1_closed(PY1, 2, 1, (0, 0, 0))


def test_S2_examples():
    assert close(sum_S2(PY1, 1, 1, (0, 0, 0)), 1)
    assert close(sum_S2(PY1, 2, 1, (0, 0, 0)), literal_S2(PY1, 2, 1, (0, 0, 0)))
    v = sum_S2(SQ3, 2, 1, (0, 0, 0))
    assert close(v, literal_S2(SQ3, 2, 1, (0, 0, 0)))
    assert close(sum_S1_closed(SQ3, 1, 2, (0, 0, 0)) * S2_factor(SQ3, 1, 2, (0, 0, 0)), sum_Sq(SQ3, 2, (0, 0, 0)))


@pytest.mark.parametrize("ctx", [PY1, SQ3], ids=["py1", "sq3"])
@pytest.mark.parametrize("q2,x", [(2, 1), (4, 1), (2, 2), (4, 2)])
def test_S2_routes_match_literal(ctx, q2, x):
    if math.gcd(x, ctx.L) != 1 or (ctx.L == 3 and q2 == 4):
        return
    for c in [(0, 0, 0), (1, 2, 0), (3, 1, 1)]:
        lit = literal_S2(ctx, q2, x, c)
        assert close(sum_S2(ctx, q2, x, c, "direct"), lit, 1e-8)
        assert close(sum_S2(ctx, q2, x, c, "reduced"), lit, 1e-8)


@given(st.integers(1, 40), vec3, st.sampled_from(["py1", "sq3"]))
def test_crt_factorization(q, c, which):
    ctx = PY1 if which == "py1" else SQ3
    from conelab.arith import omega_split
    q1, q2 = omega_split(q, ctx.omega)
    assert close(sum_Sq(ctx, q, c, "reduced"), sum_S1_closed(ctx, q1, q2, c) * S2_factor(ctx, q1, q2, c), 1e-6)


def test_salie_examples():
    assert close(salie_T(9, 0), 6) and close(salie_T(9, 18), euler_phi(9))
    assert close(salie_T(3, 0), 0) and close(salie_T(3, 6), 0)
    assert close(salie_T(5, -1), math.sqrt(5))
    assert close(salie_T(5, -1, "direct"), math.sqrt(5))
    with pytest.raises(EvenModulus):
        salie_T(4, 1)


@given(st.integers(0, 249).map(lambda k: 2 * k + 1), st.integers(-10**6, 10**6))
def test_salie_closed_matches_direct(x, m):
    assert close(salie_T(x, m), salie_T(x, m, "direct"), 1e-9)


def test_salie_squarefree_prime_evaluation():
    for x in range(1, 120, 2):
        if any(ex > 1 for _, ex in factorize(x)):
            continue
        for m in range(1, 60):
            if math.gcd(m, x) == 1:
                assert close(salie_T(x, m, "direct"), jacobi(-m, x) * gauss_iota(x), 1e-9)


def test_salie_degenerate_case():
    for x in range(1, 501, 2):
        expected = euler_phi(x) if is_square(x) else 0
        assert close(salie_T(x, 0, "direct"), expected, 1e-9)
        assert close(salie_T(x, 0), expected)


def test_salie_twisted_multiplicativity():
    for q1 in range(1, 1500, 2):
        for q2 in range(q1 + 2, 1500 // q1 + 1, 2):
            if math.gcd(q1, q2) != 1:
                continue
            for m in (1, 3, -7, 30):
                lhs = salie_T(q1 * q2, m)
                rhs = jacobi(q2, q1) * jacobi(q1, q2) * salie_T(q1, m) * salie_T(q2, m)
                assert close(lhs, rhs)


def test_char_average_examples():
    chi1 = real_characters(1)[0]
    c = (1, 2, 0)
    assert close(char_average_A(PY1, 2, chi1, c), sum_S2(PY1, 2, 1, c))
    assert close(char_average_A(PY1, 1, chi1, (0, 0, 0)), 1)
    # for L > 1 the q2 = 1 sum counts the admissible residues mod L^2, i.e. S_1(0)
    principal3 = real_characters(3)[0]
    assert close(char_average_A(SQ3, 1, principal3, (0, 0, 0)), S0_value(SQ3, 1))
    leg = legendre_character(3)
    expected = 0.5 * (sum_S2(SQ3, 2, 1, (0, 0, 0)) - sum_S2(SQ3, 2, 2, (0, 0, 0)))
    assert close(char_average_A(SQ3, 2, leg, (0, 0, 0)), expected)


@pytest.mark.parametrize("ctx", [SQ3, PY3], ids=["sq3", "py3"])
def test_flip_formula(ctx):
    rng = np.random.default_rng(7)
    for _ in range(20):
        d = int(rng.choice([1, 2, 4, 5, 7, 8]))
        c = tuple(int(v) for v in rng.integers(-5, 6, 3))
        q = int(rng.choice([1, 2, 3, 4, 6, 8]))
        for chi in real_characters(ctx.L):
            lhs = char_average_A(ctx.scaled(d), q, chi, c)
            assert close(lhs, chi(d) * char_average_A(ctx, q, chi, c), 1e-9)


def test_theta_single_term():
    c = (3, 0, 0)
    fstar = dual_eval(PYTHAGOREAN, c)
    chi = real_characters(1)[0]
    primes = {p for p, _ in factorize(PY1.omega * abs(fstar))}
    got = theta_chi(PY1, chi, c, TruncationPolicy(x_max=1), literal=True).value
    assert close(got, 6 / math.pi ** 2 * math.prod(1 - 1 / p for p in primes))
    got = theta_chi(PY1, chi, c, TruncationPolicy(x_max=1)).value
    assert close(got, 6 / math.pi ** 2 * math.prod(1 / (1 + 1 / p) for p in primes))


@pytest.mark.parametrize("c", [(3, 0, 0), (5, 3, 1), (15, 0, 3)])
def test_theta_doubling_within_tail(c):
    chi = real_characters(1)[0]
    a = theta_chi(PY1, chi, c, TruncationPolicy(x_max=10**3))
    b = theta_chi(PY1, chi, c, TruncationPolicy(x_max=10**4))
    assert abs(a.value - b.value) <= a.tail_bound + 1e-15


@pytest.mark.parametrize("c", [(3, 0, 0), (3, 3, 0), (5, 0, 0)])
def test_theta_matches_squarefull_loop(c):
    chi = real_characters(1)[0]
    fstar = dual_eval(PYTHAGOREAN, c)
    total = 0j
    for x in squarefull_up_to(200):
        if math.gcd(x, PY1.omega) != 1:
            continue
        primes = {p for p, _ in factorize(x * PY1.omega * abs(fstar))}
        prod = math.prod(1 / (1 + 1 / p) for p in primes)
        total += chi(x) * salie_T(x, fstar, "direct") / (x * gauss_iota(x, "direct")) * prod
    th = theta_chi(PY1, chi, c)
    assert th.support_max <= 200
    assert close(th.value, 6 / math.pi ** 2 * total, 1e-9)


def test_theta_zero_dual_raises():
    with pytest.raises(ZeroDual):
        theta_chi(PY1, real_characters(1)[0], (1, 0, 1))


def test_eta_no_admissible_character_is_zero():
    # F*(1,1,0) = 4 c1 c2 = 4 so -F* = -4 is not xi * square for any xi | 3
    r = eta_coefficient(SQ3, (1, 1, 0))
    assert r.value == 0 and r.components == {}


def test_eta_single_u_term():
    c = (1, 0, 1)
    assert dual_eval(PYTHAGOREAN, c) == 0
    r = eta_coefficient(PY1, c, TruncationPolicy(u_max=1), literal=True)
    assert close(r.value, 3 / math.pi ** 2 * (1 - 1 / 2))
    r = eta_coefficient(PY1, c, TruncationPolicy(u_max=1))
    assert close(r.value, 3 / math.pi ** 2 / (1 + 1 / 2))
    assert r.case == "dual-zero" and r.u_terms == 1


@pytest.mark.parametrize("u_max", [8, 64])
@pytest.mark.parametrize("c", [(0, 0, 1), (1, 1, 1), (2, 0, 0)])
def test_eta_flip(u_max, c):
    pol = TruncationPolicy(u_max=u_max)
    for chi in real_characters(3):
        for d in (2, 4, 5):
            lhs = eta_coefficient(SQ3.scaled(d), c, pol, chi=chi).value
            rhs = chi(d) * eta_coefficient(SQ3, c, pol, chi=chi).value
            assert close(lhs, rhs, 1e-9)


def test_creal_examples():
    principal = real_characters(1)[0]
    assert creal_test(principal, -9, 1) == 1
    leg = legendre_character(3)
    assert creal_test(leg, 4, 3) is None
    # (./3) is the Kronecker symbol (-3/.), so -F*(c) must be -3 times a square
    assert creal_test(leg, 12, 3) == -3
    assert creal_test(leg, -12, 3) is None
    with pytest.raises(ZeroDual):
        creal_test(leg, 0, 3)


def test_partial_F_first_term_and_increments():
    c = (1, 2, 0)
    s1 = sum_Sq(SQ3, 1, c, "direct")
    assert close(partial_F(SQ3, c, 1), e(sum(a * b for a, b in zip(c, SQ3.lam)), 9) * s1)
    series = partial_F_series(SQ3, c, 30)
    for X in range(1, 30):
        term = e(sum(a * b for a, b in zip(c, SQ3.lam)), (X + 1) * 9) * sum_Sq(SQ3, X + 1, c) / (X + 1) ** 2
        assert close(series[X] - series[X - 1], term, 1e-9)


@pytest.mark.parametrize("ctx", [PY1, SQ3], ids=["py1", "sq3"])
def test_partial_F_routes_agree(ctx):
    c = (2, 1, 1)
    a = partial_F_series(ctx, c, 40, "crt")
    b = partial_F_series(ctx, c, 40, "reduced")
    assert np.allclose(a, b, rtol=1e-9, atol=1e-9)


def test_partial_sum_S0_first_term():
    p = partial_sum_S0(SQ3, 1)
    n = sum(1 for s in np.ndindex(3, 3, 3) if SQUARE_CONE(tuple(3 * v + 1 for v in s)) % 9 == 0)
    assert p.plain == n == p.over_q3 == S0_value(SQ3, 1)


def test_partial_sum_S0_pythagorean_small():
    assert [S0_value(PY1, p) for p in (3, 5, 7)] == [0, 0, 0]
    expected = sum(round(sum_Sq(PY1, q, (0, 0, 0), "direct").real) for q in range(1, 11))
    assert partial_sum_S0(PY1, 10).plain == expected


def test_partial_sum_S0_cubic_growth_ratio():
    a, b = partial_sum_S0_series(PY1, [50, 100])
    assert abs(b.plain / a.plain - 8) < 0.1 * 8


@pytest.mark.parametrize("ctx", [PY1, SQ1], ids=["py1", "sq1"])
def test_S0_prime_pattern(ctx):
    from conelab.arith import primes_up_to
    for p in primes_up_to(31):
        if ctx.omega % p == 0:
            continue
        assert S0_value(ctx, p) == 0
        assert S0_value(ctx, p * p) == p ** 5 - p ** 4


def test_S2_bound_diagnostic():
    ratios = [abs(sum_S2(PY1, q2, 1, (1, 2, 3))) / q2 ** 2.5 for q2 in (2, 4, 8, 16, 32, 64)]
    assert max(ratios) < 16
