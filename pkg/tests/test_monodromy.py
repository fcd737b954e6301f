from fractions import Fraction
from math import lcm

import pytest

from conftest import stages
from stablered.monodromy import bound_report, remark_gg_case
from stablered.numfield import INFINITY


def report_for(name):
    st = stages(name)
    cls = st.res.class_data
    return bound_report(st.md, st.res.analysis.roots, cls, [c.component.radius_valuation for c in cls])


def test_hand_fixture_bound():
    rep = report_for("hand")
    assert rep.slope_denominators == [3]
    assert sorted(rep.branch_degrees) == [1, 3]
    assert rep.radius_denominators == [3]
    # s_0 at the zeros of L: 1 at y = 0 and -3 at y^3 = -4, both units
    assert [r["s0_valuation"] for r in rep.radicand_data] == ["0/1"]
    assert rep.degree_bound == 3 * 3 * 2 == 18
    assert rep.label == "heuristic-coarse"


def test_s0_values_at_hand_roots():
    st = stages("hand")
    from stablered.padicroots import eval_valuation_bound
    from stablered.parsing import parse_poly
    from stablered.reduction import embed_poly
    seen = set()
    for r in st.res.analysis.roots:
        for value in (1, -3):
            shifted = embed_poly(st.dec.s0 - parse_poly(str(value), st.K, "Y"), r.host)
            ok, v = eval_valuation_bound(shifted, r)
            if ok and v == INFINITY:
                seen.add(value)
    assert seen == {1, -3}


def test_gud_single_class_of_nine():
    rep = report_for("gud")
    assert rep.class_sizes == [9]
    assert sum(rep.branch_degrees) == 9 == stages("gud").md.L.degree


def test_bound_divisible_by_observed_denominators():
    for name in ("hand", "elli_c", "gud"):
        rep = report_for(name)
        assert rep.degree_bound >= 1
        for d in rep.slope_denominators + rep.radius_denominators:
            assert rep.degree_bound % d == 0


def test_bound_not_increased_by_escalated_base():
    # the same f over Q_2(2^(1/3)) has integral slopes and radius: the relative bound shrinks
    from conftest import Stages
    base = report_for("hand")
    st = Stages("1 + X^3", 2, 3)
    cls = st.res.class_data
    esc = bound_report(st.md, st.res.analysis.roots, cls, [c.component.radius_valuation for c in cls])
    assert esc.slope_denominators == [1] and esc.radius_denominators == [1]
    assert esc.degree_bound <= base.degree_bound


@pytest.mark.parametrize("m,p,l,s,d,exp,amb", [
    (5, 2, 1, 2, 1, 5, False),
    (4, 3, 1, 1, 1, 3, False),
    (3, 3, 1, 0, 2, 1, True),
    (7, 2, 3, 1, 1, 1, False),
    (10, 3, 1, 2, 1, 5, False),
    (11, 3, 1, 2, 2, 1, False),
    (7, 3, 2, 1, 1, 2, False),
])
def test_remark_gg_cases(m, p, l, s, d, exp, amb):
    case = remark_gg_case(m, p)
    assert (case.l, case.s, case.d, case.exponent, case.ambiguous) == (l, s, d, exp, amb)
    if not amb:
        assert m == l * p ** s + d and l % p and 1 <= d <= p - 1
