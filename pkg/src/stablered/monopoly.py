"""S_0, S_1 and the monodromy polynomial L(Y)."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .decomp import SpecialDecomposition, binom_one_over_p
from .errors import DegreeMismatch, NonIntegralMonodromyPolynomial
from .polyalg import Poly, gcd


@dataclass
class MonodromyData:
    S0: Poly
    S1: Poly
    m: int
    alpha: int
    p: int
    g: Poly
    L: Poly | None = None
    c_norm: Fraction | None = None
    sign: int = -1

    @property
    def expected_degree(self) -> int:
        return self.p ** self.alpha * (self.m - 1)


def logderiv_parts(f: Poly):
    """(S_0, S_1, m) with S_1/S_0 = f'/f reduced, S_0 monic."""
    f = f.with_var("Y")
    fp = f.derivative()
    g = gcd(f, fp)
    S0 = f.exact_div(g)
    S1 = fp.exact_div(g)
    inv = S0.lc.inverse()
    return S0 * inv, S1 * inv, S0.degree


def normalizing_constant(p: int, alpha: int) -> Fraction:
    """(1/p choose p^(alpha-1))^p, and 1 when alpha = 0."""
    if alpha == 0:
        return Fraction(1)
    return binom_one_over_p(p, p ** (alpha - 1)) ** p


def extraction_sign(p: int, alpha: int) -> int:
    """Sign making L congruent to +S_1^(p^alpha) mod p.

    The unsigned quotient is congruent to -S_1 when alpha = 0 and to +S_1^(p^alpha)
    for odd p with alpha >= 1.  For p = 2 both signs pass the congruence; -1 gives
    a positive leading coefficient (3Y^4 + 12Y for 1 + X^3).
    """
    return -1 if p == 2 or alpha == 0 else 1


def monodromy_data(f: Poly, dec: SpecialDecomposition) -> MonodromyData:
    S0, S1, m = logderiv_parts(f)
    rep = dec.rep
    g = dec.s0.exact_div(S0)
    md = MonodromyData(S0, S1, m, rep.alpha, rep.p, g)
    md.L = monodromy_polynomial(dec, md)
    return md


def monodromy_polynomial(dec: SpecialDecomposition, md: MonodromyData) -> Poly:
    """L = sign * A_{p^alpha} * S_0^{p^alpha} / c_norm, with exactness and degree checks."""
    pa = dec.rep.p_alpha
    num = dec.tail_num[pa]  # A_{p^alpha} * s_0^{p^alpha}
    divisor = md.g ** pa
    q, rem = num.divmod(divisor)
    if not rem.is_zero():
        raise NonIntegralMonodromyPolynomial("A_{p^alpha} S_0^{p^alpha} is not a polynomial")
    md.c_norm = normalizing_constant(md.p, md.alpha)
    md.sign = extraction_sign(md.p, md.alpha)
    L = q * (Fraction(md.sign) / md.c_norm)
    if L.degree != md.expected_degree:
        raise DegreeMismatch(f"deg L = {L.degree}, expected {md.expected_degree}")
    if not L.is_integral():
        raise NonIntegralMonodromyPolynomial("monodromy polynomial has non-integral coefficients")
    return L.with_var("Y")


def check_congruence(md: MonodromyData, L: Poly | None = None) -> bool:
    """True iff every coefficient of L - S_1^(p^alpha) has valuation >= 1."""
    L = md.L if L is None else L
    diff = L - md.S1 ** (md.p ** md.alpha)
    return all(c.valuation() >= 1 for c in diff.coeffs)
