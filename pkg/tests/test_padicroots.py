from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from stablered.numfield import INFINITY, make_field
from stablered.padicroots import (EXACT_ZERO, certified_eval_valuation, difference_matrix,
                                  difference_polynomial, distance_multiset, isolate_roots,
                                  slope_split)
from stablered.parsing import parse_poly
from stablered.polyalg import Poly, newton_polygon

Q2 = make_field(2, 1)


def P(text, K=Q2):
    return parse_poly(text, K, "Y")


def test_slope_split_examples():
    out = slope_split(P("3*Y^4 + 12*Y"))
    assert len(out) == 1
    slope, res, length = out[0]
    assert (slope, length) == (Fraction(-2, 3), 3) and len(res) - 1 == 1

    Q3 = make_field(3, 1)
    (slope, res, length), = slope_split(P("Y^2 - 3", Q3))
    assert (slope, length) == (Fraction(-1, 2), 2)
    # the residual of a half-integral slope of length 2 is linear in Y^2
    assert len(res) == 2

    out = slope_split(P("Y^2 - 3*Y + 2"))  # (Y - 1)(Y - 2)
    assert [(s, l) for s, _, l in out] == [(Fraction(-1), 1), (Fraction(0), 1)]


def test_residual_irreducible_for_odd_p():
    from stablered.padicroots import residual_polynomial
    Q3 = make_field(3, 2)  # Y^2 - 3 has roots +-pi: the residual sees them in e=2
    F = P("Y^2 - 3", Q3)
    seg = newton_polygon(F).segments[0]
    res, d = residual_polynomial(F, seg)
    assert d == 1 and len(res) == 3


def test_isolate_hand_fixture():
    roots = isolate_roots(P("3*Y^4 + 12*Y"), Fraction(3))
    assert len(roots) == 4
    zero = [r for r in roots if r.value.is_zero()]
    assert len(zero) == 1 and zero[0].is_exact
    others = [r for r in roots if r is not zero[0]]
    assert all(r.slope == Fraction(2, 3) and r.error_valuation >= 3 for r in others)
    assert others[0].host.e % 3 == 0
    L = P("3*Y^4 + 12*Y")
    for r in roots:
        v = certified_eval_valuation(L.map_coeffs(lambda c: r.host(c.rational()), r.host), r)
        assert v is EXACT_ZERO


def test_isolate_simple_cases():
    roots = isolate_roots(P("Y^2 - 2"), Fraction(4))
    assert len(roots) == 2 and all(r.host.e % 2 == 0 and r.slope == Fraction(1, 2) for r in roots)
    for r in roots:
        assert r.value ** 2 - 2 == 0 or (r.value ** 2 - 2).valuation() >= r.error_valuation + Fraction(1, 2)
    roots = isolate_roots(P("Y^2 - Y"))
    assert sorted(r.value.rational() for r in roots) == [0, 1]
    assert all(r.is_exact for r in roots)


def test_certified_eval_examples():
    L = P("3*Y^4 + 12*Y")
    roots = isolate_roots(L, Fraction(3))
    zero = next(r for r in roots if r.is_exact)
    for r in roots:
        E = r.host
        s0 = P("1 + Y^3").map_coeffs(lambda c: E(c.rational()), E)
        N2 = P("Y^4 + 4*Y").map_coeffs(lambda c: E(c.rational()), E)
        assert certified_eval_valuation(s0, r) == 0
        if r is zero:
            assert certified_eval_valuation(N2, r) is EXACT_ZERO


def test_difference_matrix_examples():
    roots = isolate_roots(P("3*Y^4 + 12*Y"), Fraction(3))
    d = difference_matrix(roots)
    off = {d[i, j] for i in range(4) for j in range(4) if i != j}
    assert off == {Fraction(2, 3)}
    assert d.is_ultrametric()
    d01 = difference_matrix(isolate_roots(P("Y^2 - Y")))
    assert d01[0, 1] == 0
    assert len(difference_matrix(isolate_roots(P("Y - 1")))) == 1


def test_distance_multiset_hand():
    # roots 0 and three cube roots of -4: all 12 ordered differences have valuation 2/3
    T = P("Y^4 + 4*Y")
    assert distance_multiset(T) == {Fraction(2, 3): 12}
    D = difference_polynomial(T)
    assert D.degree == 12


def test_distance_multiset_rational_roots():
    T = P("Y^3 - 7*Y^2 + 14*Y - 8")  # roots 1, 2, 4
    # differences +-1, +-3 (v=0), +-2 (v=1)
    assert distance_multiset(T) == {Fraction(0): 4, Fraction(1): 2}


@settings(max_examples=25)
@given(st.lists(st.integers(-12, 12), min_size=2, max_size=5, unique=True))
def test_isolation_matches_newton_polygon(ints):
    F = Poly.one(Q2)
    for a in ints:
        F = F * P(f"Y - {a}") if a >= 0 else F * P(f"Y + {-a}")
    F = F + P("4096")  # simple roots move but stay in Q_2 by Hensel
    roots = isolate_roots(F, Fraction(6))
    got = {}
    for r in roots:
        got[r.slope] = got.get(r.slope, 0) + r.multiplicity * r.cluster_size
    want = {}
    for v, m in newton_polygon(F).root_valuations():
        want[v] = want.get(v, 0) + m
    assert got == want
    assert difference_matrix(roots).is_ultrametric()


def test_roots_outside_every_host_fail_loudly():
    from stablered.errors import EscalationLimit
    # roots 4 +- 2 sqrt(3): Q_2(sqrt 3) lies in no Q_2^ur(2^(1/e))
    with pytest.raises(EscalationLimit):
        isolate_roots(P("Y^2 - 8*Y + 4"), max_extension=16)
