from fractions import Fraction

import pytest
import sympy
from hypothesis import given

from conftest import Y, to_sympy
from test_decomp import admissible
from stablered.decomp import min_reps, special_decomposition
from stablered.monopoly import (check_congruence, extraction_sign, logderiv_parts, monodromy_data,
                                normalizing_constant)
from stablered.numfield import make_field
from stablered.parsing import parse_poly


def md_for(text, p, e=1):
    K = make_field(p, e)
    f = parse_poly(text, K)
    dec = special_decomposition(f, min_reps(f.degree, p))
    return K, f, dec, monodromy_data(f, dec)


def test_logderiv_examples():
    K = make_field(2, 1)
    S0, S1, m = logderiv_parts(parse_poly("1 + X^4 + X^5", K))
    assert (S0, S1, m) == (parse_poly("1 + Y^4 + Y^5", K, "Y"), parse_poly("4*Y^3 + 5*Y^4", K, "Y"), 5)
    K3 = make_field(3, 1)
    S0, S1, m = logderiv_parts(parse_poly("1 + 2*X + X^2", K3))
    assert (S0, S1, m) == (parse_poly("1 + Y", K3, "Y"), parse_poly("2", K3, "Y"), 1)
    S0, S1, m = logderiv_parts(parse_poly("1 + X", K))
    assert (S0, S1, m) == (parse_poly("1 + Y", K, "Y"), parse_poly("1", K, "Y"), 1)


def test_hand_fixture_L():
    K, f, dec, md = md_for("1 + X^3", 2)
    assert md.L == parse_poly("3*Y^4 + 12*Y", K, "Y")
    assert md.c_norm == Fraction(1, 4)
    # A_2 = -(1/4) L / S_0^2, read back from the decomposition
    A2 = dec.tail[2]
    assert sympy.cancel(to_sympy(A2.num, Y) / to_sympy(A2.den, Y)
                        + sympy.Rational(1, 4) * (3 * Y ** 4 + 12 * Y) / (1 + Y ** 3) ** 2) == 0
    assert check_congruence(md)


def test_alpha_zero_case():
    K, f, dec, md = md_for("1 + X^3", 5)
    assert md.alpha == 0 and normalizing_constant(5, 0) == 1
    assert md.L == parse_poly("3*Y^2", K, "Y") == md.S1
    assert check_congruence(md)


def test_elli_c_degree_and_congruence():
    K, f, dec, md = md_for("1 + X^4 + X^5", 2)
    assert md.L.degree == 16 == md.expected_degree
    assert check_congruence(md)


def test_congruence_detects_corruption():
    K, f, dec, md = md_for("1 + X^3", 2)
    assert not check_congruence(md, md.L + parse_poly("1", K, "Y"))


def test_sign_rule():
    assert extraction_sign(2, 2) == -1
    assert extraction_sign(3, 1) == 1
    assert extraction_sign(5, 0) == -1


def test_odd_prime_congruence_gud():
    K, f, dec, md = md_for("1 + pi^3*X^3 + X^4", 3, 4)
    assert md.L.degree == 9 and check_congruence(md)


@given(admissible())
def test_random_L_properties(case):
    p, f = case
    dec = special_decomposition(f, min_reps(f.degree, p))
    md = monodromy_data(f, dec)
    assert md.L.degree == md.expected_degree
    assert check_congruence(md)
    assert md.S0.is_monic()
    assert md.S1 * f.with_var("Y") == md.S0 * f.with_var("Y").derivative()
