from fractions import Fraction

import pytest
import sympy
from hypothesis import given, strategies as st

from conftest import X, Y, to_sympy
from stablered.numfield import INFINITY, make_field
from stablered.parsing import parse_poly
from stablered.polyalg import (Poly, RatFunc, evaluate, gcd, newton_polygon, resultant,
                               squarefree_decomposition, squarefree_part, taylor_shift)

Q2 = make_field(2, 1)


def P(text, K=Q2, var="Y"):
    return parse_poly(text, K, var)


def test_taylor_shift_examples():
    s = taylor_shift(P("X^2", var="X"))
    assert s == [P("Y^2"), P("2*Y"), P("1")]
    s = taylor_shift(P("1 + X^4 + X^5", var="X"))
    assert s[4] == P("1 + 5*Y")
    s = taylor_shift(P("1 + X^3", var="X"))
    assert (s[1], s[2], s[3]) == (P("3*Y^2"), P("3*Y"), P("1"))


def test_taylor_shift_matches_sympy_expansion():
    f = P("1 + 3*X^2 - X^4 + X^5 + 7/2*X^7", var="X")
    s = taylor_shift(f)
    expanded = sympy.expand(to_sympy(f, X).subs(X, X + Y))
    for i, si in enumerate(s):
        assert sympy.expand(expanded.coeff(X, i) - to_sympy(si, Y)) == 0


def test_gcd_examples():
    assert gcd(P("Y^2 - 1"), P("Y - 1")) == P("Y - 1")
    assert gcd(P("Y^3"), P("Y^2")) == P("Y^2")
    assert gcd(P("1 + 2*Y + Y^2"), P("2 + 2*Y")) == P("1 + Y")


def test_resultant_examples():
    assert resultant(P("Y - 3"), P("Y^2 - 2")) == Q2(7)
    assert resultant(P("Y^2 - 2"), P("Y^2 - 2")).is_zero()
    assert resultant(P("Y^3 + 4"), P("Y^3 + 1")) == Q2(-27)


def test_resultant_against_sympy():
    a, b = P("3 + Y - 2*Y^3 + Y^4"), P("1/2 - Y + 5*Y^2")
    expected = sympy.resultant(to_sympy(a, Y), to_sympy(b, Y), Y)
    assert resultant(a, b).rational() == Fraction(int(expected.p), int(expected.q))


def test_squarefree_part_examples():
    assert squarefree_part(P("Y^2")) == P("Y")
    f = P("1 + Y^4 + Y^5")
    assert squarefree_part(f) == f and squarefree_part(f).degree == 5
    assert squarefree_part(P("Y^3 - 4*Y^2 + 5*Y - 2")) == P("Y^2 - 3*Y + 2")


def test_squarefree_decomposition_multiplicities():
    f = P("Y^2 - 2*Y + 1") * P("Y + 3") ** 3
    parts = squarefree_decomposition(f)
    assert sorted((g.degree, m) for g, m in parts) == [(1, 2), (1, 3)]


def test_newton_polygon_examples():
    np_ = newton_polygon(P("Y^2 - 2"))
    assert [(s.slope, s.length) for s in np_.segments] == [(Fraction(-1, 2), 2)]
    assert np_.root_valuations() == [(Fraction(1, 2), 2)]

    np_ = newton_polygon(P("3*Y^4 + 12*Y"))
    assert np_.ord_zero == 1
    assert np_.vertices == ((1, 2), (4, 0))
    assert np_.root_valuations() == [(Fraction(2, 3), 3), (INFINITY, 1)]

    np_ = newton_polygon(P("5"))
    assert np_.segments == () and np_.root_valuations() == []


def test_eval_examples():
    assert evaluate(P("Y^2 + 1"), Q2(2)) == Q2(5)
    assert P("1 + Y^3")(Q2(0)) == Q2(1)
    K = make_field(2, 3)
    # y = -pi^2 satisfies y^3 = -4 in e = 3
    y = -K.pi() ** 2
    assert y ** 3 == K(-4)
    assert P("1 + Y^3", K)(y) == K(-3)


def test_ratfunc_reduced_and_monic():
    r = RatFunc(P("2*Y^2 - 2"), P("4*Y - 4"))
    assert r.den == P("1") and r.num == P("1/2*Y + 1/2")
    assert r * RatFunc(P("Y")) == RatFunc(P("1/2*Y^2 + 1/2*Y"))


# -- properties --------------------------------------------------------------

coeff = st.fractions(min_value=-9, max_value=9, max_denominator=4)


def polys(min_deg=0, max_deg=8, var="Y"):
    return st.lists(coeff, min_size=min_deg + 1, max_size=max_deg + 1).map(
        lambda cs: Poly.from_rationals(Q2, cs, var))


@given(polys(1, 12, "X"))
def test_taylor_shift_round_trip(f):
    if f.is_zero():
        return
    s = taylor_shift(f)
    zero = Q2(0)
    assert Poly(Q2, [si(zero) for si in s], "X") == f
    assert s[0] == f.with_var("Y")


@given(polys(1, 6), polys(1, 6))
def test_gcd_divides(a, b):
    if a.is_zero() or b.is_zero():
        return
    g = gcd(a, b)
    assert a.divmod(g)[1].is_zero() and b.divmod(g)[1].is_zero()
    assert g.degree + a.exact_div(g).degree == a.degree
    assert resultant(a, b).is_zero() == (g.degree > 0)


@given(polys(1, 4), polys(1, 4))
def test_newton_polygon_of_product(a, b):
    if a.is_zero() or b.is_zero():
        return
    def multiset(f):
        out = {}
        for v, m in newton_polygon(f).root_valuations():
            out[v] = out.get(v, 0) + m
        return out
    union = multiset(a)
    for v, m in multiset(b).items():
        union[v] = union.get(v, 0) + m
    assert multiset(a * b) == union
    assert sum(union.values()) == (a * b).degree


@given(st.lists(st.integers(-5, 5), min_size=7, max_size=10), st.integers(-4, 4).filter(bool),
       st.integers(0, 3))
def test_scaled_shift_matches_plain_shift(cs, a, t):
    K = make_field(2, 2, [1, 1, 1])
    f = Poly.from_rationals(K, cs + [1], "Y")
    c = (K.u() * a + 1).mul_pi_power(t)
    assert f.shift(c) == f.shift_by(lambda x: x * c)
