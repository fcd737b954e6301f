import os
import sys
from fractions import Fraction

import pytest
import sympy
from hypothesis import HealthCheck, settings

from stablered.numfield import make_field
from stablered.parsing import parse_poly

settings.register_profile("default", deadline=None, suppress_health_check=[HealthCheck.too_slow])
settings.register_profile("ci", parent=settings.get_profile("default"), max_examples=300)
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))

Y = sympy.Symbol("Y")
X = sympy.Symbol("X")


def to_sympy(poly, var=None):
    """Sympy expression of a polynomial with rational coefficients."""
    var = var if var is not None else sympy.Symbol(poly.var)
    return sum((sympy.Rational(c.rational().numerator, c.rational().denominator) * var ** i
                for i, c in enumerate(poly.coeffs)), sympy.Integer(0))


def rat(q):
    return sympy.Rational(Fraction(q).numerator, Fraction(q).denominator)


@pytest.fixture
def Q2():
    return make_field(2, 1)


@pytest.fixture
def poly():
    def build(text, p=2, e=1, var="X"):
        return parse_poly(text, make_field(p, e), var)
    return build


FIXTURES = {
    "hand": ("1 + X^3", 2, 1),
    "elli_c": ("1 + X^4 + X^5", 2, 1),
    "elli_a": ("1 + pi^9*X^2 + X^3 + pi^6*X^4 + X^5", 2, 15),
    "elli_b": ("1 + pi^3*X^2 + pi^6*X^3 + X^5", 2, 9),
    "gud": ("1 + pi^3*X^3 + X^4", 3, 4),
}

_cache = {}


class Stages:
    """Every intermediate object of one pipeline run."""

    def __init__(self, text, p, e):
        from stablered.decomp import min_reps, special_decomposition
        from stablered.monopoly import monodromy_data
        from stablered.reduction import reduction_setup, stable_reduction, validate_input
        self.K = make_field(p, e)
        self.f = parse_poly(text, self.K)
        self.val = validate_input(self.f, p)
        self.rep = min_reps(self.f.degree, p)
        self.dec = special_decomposition(self.f, self.rep)
        self.md = monodromy_data(self.f, self.dec)
        self.setup = reduction_setup(self.dec, self.md)
        self.res = stable_reduction(self.setup, self.val.genus)


def stages(name):
    if name not in _cache:
        _cache[name] = Stages(*FIXTURES[name])
    return _cache[name]


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    if mod is not None and mod.RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in mod.RESULTS:
            terminalreporter.write_line(line)
