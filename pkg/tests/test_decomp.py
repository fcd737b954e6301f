from fractions import Fraction

import pytest
import sympy
from hypothesis import given, strategies as st

from conftest import X, Y, rat, to_sympy
from stablered.decomp import (binom_one_over_p, binom_val, min_reps, normalize_tail,
                              recursive_head, special_decomposition)
from stablered.errors import DegreeDivisibleByP, PreconditionViolation
from stablered.numfield import make_field, vp_rational
from stablered.parsing import parse_poly
from stablered.polyalg import Poly, RatFunc


def sympy_decomposition(f_expr, n, p):
    """Independent head/tail computation with sympy rational functions."""
    r = (n - 1) // p
    s0 = f_expr.subs(X, Y)
    shifted = sympy.expand(f_expr.subs(X, X + Y))
    F0 = sum(sympy.cancel(shifted.coeff(X, i) / s0) * X ** i for i in range(1, n + 1))
    H = sum(sympy.binomial(sympy.Rational(1, p), t) * F0 ** t for t in range(r + 1))
    H = sympy.series(H, X, 0, r + 1).removeO()
    Hp = sympy.expand(H ** p)
    tail = {i: sympy.cancel(Hp.coeff(X, i) - shifted.coeff(X, i) / s0) for i in range(r + 1, n + 1)}
    head = {i: sympy.cancel(H.coeff(X, i)) for i in range(1, r + 1)}
    return head, tail


def as_sympy(rf: RatFunc):
    return sympy.cancel(to_sympy(rf.num, Y) / to_sympy(rf.den, Y))


def test_binom_val_examples():
    assert binom_val(2, 1) == -1
    assert binom_val(2, 2) == -3
    assert binom_val(3, 0) == 0 and binom_val(2, 0) == 0


@pytest.mark.parametrize("p", [2, 3, 5, 7])
def test_binom_val_matches_exact_rational(p):
    for t in range(51):
        assert binom_val(p, t) == vp_rational(binom_one_over_p(p, t), p)
        assert binom_one_over_p(p, t) == Fraction(int(sympy.binomial(sympy.Rational(1, p), t).p),
                                                   int(sympy.binomial(sympy.Rational(1, p), t).q))


def enumerate_reps(n, p):
    """Brute force: the r with r p < n and the unique p-power in {r+1..n}."""
    r = max(k for k in range(n) if k * p < n)
    M0 = list(range(r + 1, n + 1))
    powers = [i for i in M0 if any(i == p ** a for a in range(n + 1))]
    return r, M0, powers


@pytest.mark.parametrize("n,p,r,M0,pa", [(5, 2, 2, (3, 4, 5), 4), (4, 3, 1, (2, 3, 4), 3), (1, 2, 0, (1,), 1)])
def test_min_reps_examples(n, p, r, M0, pa):
    rep = min_reps(n, p)
    assert (rep.r, rep.M0, rep.p_alpha) == (r, M0, pa)
    er, eM0, powers = enumerate_reps(n, p)
    assert (er, tuple(eM0), powers) == (r, M0, [pa])


@pytest.mark.parametrize("n,p", [(n, p) for p in (2, 3, 5, 7) for n in range(1, 40) if n % p])
def test_min_reps_representatives(n, p):
    rep = min_reps(n, p)
    for k in range(1, n + 1):
        hits = [m for m in rep.M0 if any(k * p ** e == m for e in range(8))]
        assert len(hits) == 1


def test_min_reps_rejects_multiples():
    with pytest.raises(DegreeDivisibleByP):
        min_reps(6, 3)


def test_hand_fixture_p2():
    K = make_field(2, 1)
    f = parse_poly("1 + X^3", K)
    dec = special_decomposition(f, min_reps(3, 2))
    s0 = 1 + Y ** 3
    assert sympy.cancel(as_sympy(dec.head[1]) - 3 * Y ** 2 / (2 * s0)) == 0
    assert sympy.cancel(as_sympy(dec.tail[2]) + 3 * Y * (Y ** 3 + 4) / (4 * s0 ** 2)) == 0
    assert sympy.cancel(as_sympy(dec.tail[3]) + 1 / s0) == 0
    assert dec.identity_holds()
    # normalized tail
    assert dec.c[2] == K(Fraction(-3, 4)) and dec.N[2] == parse_poly("Y^4 + 4*Y", K, "Y")
    assert dec.c[3] == K(-1) and dec.N[3] == parse_poly("1 + 2*Y^3 + Y^6", K, "Y")


def test_hand_fixture_p5_r0():
    K = make_field(5, 1)
    f = parse_poly("1 + X^3", K)
    rep = min_reps(3, 5)
    dec = special_decomposition(f, rep)
    assert rep.r == 0 and dec.head_num == [Poly.one(K)]
    for i in (1, 2, 3):
        assert dec.tail[i] == RatFunc(-dec.s[i], dec.s0)
    assert dec.c[1] == K(-3) and dec.N[1] == parse_poly("Y^2", K, "Y")


def test_elli_c_against_sympy():
    K = make_field(2, 1)
    f = parse_poly("1 + X^4 + X^5", K)
    dec = special_decomposition(f, min_reps(5, 2))
    assert dec.identity_holds()
    head, tail = sympy_decomposition(1 + X ** 4 + X ** 5, 5, 2)
    for i, a in dec.head.items():
        assert sympy.cancel(as_sympy(a) - head[i]) == 0
    for i, A in dec.tail.items():
        assert sympy.cancel(as_sympy(A) - tail[i]) == 0


def test_top_tail_normalization():
    K = make_field(3, 1)
    f = parse_poly("2 + 3*X - X^2 + X^4 + X^5", K)
    dec = special_decomposition(f, min_reps(5, 3))
    assert dec.c[5] == K(-1) and dec.N[5] == dec.s0 ** 4


def test_preconditions():
    K = make_field(2, 1)
    with pytest.raises(PreconditionViolation):
        special_decomposition(parse_poly("1 + 2*X^3", K), min_reps(3, 2))
    with pytest.raises(PreconditionViolation):
        special_decomposition(parse_poly("1/2 + X^3", K), min_reps(3, 2))


# -- properties --------------------------------------------------------------

@st.composite
def admissible(draw, max_deg=9):
    p = draw(st.sampled_from([2, 3, 5]))
    n = draw(st.integers(1, max_deg).filter(lambda n: n % p))
    low = draw(st.lists(st.integers(-6, 6), min_size=n, max_size=n))
    K = make_field(p, 1)
    return p, Poly.from_rationals(K, low + [1], "X")


@given(admissible())
def test_identity_and_two_routes(case):
    p, f = case
    rep = min_reps(f.degree, p)
    dec = special_decomposition(f, rep)
    assert dec.identity_holds()
    assert recursive_head(f, rep) == dec.head_num
    if rep.alpha >= 1:
        assert dec.c[rep.p_alpha].valuation() == p * binom_val(p, rep.p_alpha // p)
    assert dec.c[rep.n] == -1 and dec.N[rep.n] == dec.s0 ** (rep.n - 1)


@given(admissible(max_deg=6))
def test_head_power_matches_f_below_r(case):
    p, f = case
    rep = min_reps(f.degree, p)
    dec = special_decomposition(f, rep)
    for i in range(1, rep.r + 1):
        assert dec.power_num[i] == dec.s[i] * dec.s0 ** (i - 1)
