"""Special decomposition of f(X + Y) into a p-th power head and a tail.

Writing f(X+Y) = s_0(Y) * (1 + F_0(X, Y)), the head H is the truncation of
(1 + F_0)^(1/p) to X-degree r, and the tail collects the X^i coefficients
(r < i <= n) of H^p - f(X+Y)/s_0 with opposite sign:

    f(X+Y) = s_0 * (H^p - sum_{i>r} A_i X^i).

Every X^i coefficient that appears is a polynomial in Y divided by s_0^i,
so the computation runs on "graded" series whose i-th entry stores only
that numerator polynomial.  No rational-function arithmetic is needed.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property

from .errors import DegreeDivisibleByP, NonPolynomialTail, PreconditionViolation
from .numfield import FieldElement
from .polyalg import Poly, RatFunc, taylor_shift


def binom_one_over_p(p: int, t: int) -> Fraction:
    """The binomial coefficient (1/p choose t) as an exact rational."""
    out = Fraction(1)
    x = Fraction(1, p)
    for j in range(t):
        out = out * (x - j) / (j + 1)
    return out


def binom_val(p: int, t: int) -> int:
    """v_p of (1/p choose t), i.e. -(t + floor(t/p) + floor(t/p^2) + ...)."""
    total = 0
    q = t
    while q:
        total += q
        q //= p
    return -total


@dataclass(frozen=True)
class RepData:
    n: int
    p: int
    r: int
    M0: tuple
    alpha: int

    @property
    def p_alpha(self) -> int:
        return self.p ** self.alpha

    @property
    def tail_indices(self):
        return self.M0


def min_reps(n: int, p: int) -> RepData:
    """Representatives {r+1, ..., n} of {1..n} modulo multiplication by powers of p."""
    if n < 1:
        raise PreconditionViolation("degree must be positive")
    if n % p == 0:
        raise DegreeDivisibleByP(f"degree {n} is divisible by p={p}")
    r = (n - 1) // p
    M0 = tuple(range(r + 1, n + 1))
    powers = [i for i in M0 if _is_p_power(i, p)]
    if len(powers) != 1:
        raise PreconditionViolation(f"expected exactly one power of {p} in {M0}")
    alpha = 0
    while p ** alpha < powers[0]:
        alpha += 1
    _check_representatives(n, p, M0)
    return RepData(n, p, r, M0, alpha)


def _is_p_power(i: int, p: int) -> bool:
    while i % p == 0:
        i //= p
    return i == 1


def _check_representatives(n, p, M0):
    """Each k in 1..n meets M0 exactly once along k, kp, kp^2, ..."""
    members = set(M0)
    for k in range(1, n + 1):
        hits = 0
        x = k
        while x <= n:
            hits += x in members
            x *= p
        if hits != 1:
            raise PreconditionViolation(f"{k} meets the representative set {hits} times")


# ---------------------------------------------------------------------------
# graded series: entry i is the numerator of the X^i coefficient over s_0^i


def _graded_mul(a, b, top):
    desc = (a[0] if a else b[0]).desc
    out = [Poly.zero(desc) for _ in range(top + 1)]
    for i, x in enumerate(a):
        if x.is_zero():
            continue
        for j, y in enumerate(b):
            if i + j > top:
                break
            if not y.is_zero():
                out[i + j] = out[i + j] + x * y
    return out


def _graded_pow(a, n, top):
    desc = a[0].desc
    result = [Poly.one(desc)] + [Poly.zero(desc)] * top
    base = list(a[: top + 1]) + [Poly.zero(desc)] * max(0, top + 1 - len(a))
    while n:
        if n & 1:
            result = _graded_mul(result, base, top)
        n >>= 1
        if n:
            base = _graded_mul(base, base, top)
    return result


@dataclass
class SpecialDecomposition:
    """Head and tail of f(X+Y) = s_0 (H^p - sum A_i X^i) in numerator form.

    ``head_num[i]`` is a_i * s_0^i (head_num[0] = 1) and ``tail_num[i]`` is
    A_i * s_0^i; both are polynomials in Y.  ``c`` and ``N`` hold the
    normalized tail A_i = c_i N_i / s_0^i with N_i monic.
    """

    rep: RepData
    s: list
    head_num: list
    power_num: list
    tail_num: dict
    c: dict = field(default_factory=dict)
    N: dict = field(default_factory=dict)

    @property
    def s0(self) -> Poly:
        return self.s[0]

    @property
    def desc(self):
        return self.s0.desc

    @cached_property
    def s0_powers(self):
        out = [Poly.one(self.desc)]
        for _ in range(self.rep.n):
            out.append(out[-1] * self.s0)
        return out

    @property
    def head(self):
        """a_1..a_r as reduced rational functions."""
        return {i: RatFunc(self.head_num[i], self.s0_powers[i]) for i in range(1, self.rep.r + 1)}

    @property
    def tail(self):
        """A_{r+1}..A_n as reduced rational functions."""
        return {i: RatFunc(self.tail_num[i], self.s0_powers[i]) for i in self.rep.M0}

    def identity_holds(self) -> bool:
        """Exact check of f(X+Y) = s_0 (H^p - sum A_i X^i), coefficientwise in X."""
        n = self.rep.n
        hp = _graded_pow(self.head_num, self.rep.p, n)
        for i in range(n + 1):
            lhs = self.s[i] * self.s0_powers[i - 1] if i >= 1 else self.s[0]
            rhs = hp[i] - self.tail_num.get(i, Poly.zero(self.desc))
            if i == 0:
                rhs = rhs * self.s0
            if lhs != rhs:
                return False
        return True


def special_decomposition(f: Poly, rep: RepData) -> SpecialDecomposition:
    """Head by the (1 + F_0)^(1/p) series, tail read off from H^p."""
    _check_input(f, rep)
    desc = f.desc
    s = taylor_shift(f.with_var("Y"))
    s0 = s[0]
    n, r, p = rep.n, rep.r, rep.p
    s0_pow = [Poly.one(desc)]
    for _ in range(n):
        s0_pow.append(s0_pow[-1] * s0)
    F0 = [Poly.zero(desc)] + [s[i] * s0_pow[i - 1] for i in range(1, n + 1)]

    head = [Poly.one(desc)] + [Poly.zero(desc)] * r
    power = [Poly.one(desc)] + [Poly.zero(desc)] * r
    for t in range(1, r + 1):
        power = _graded_mul(power, F0, r)
        b = binom_one_over_p(p, t)
        for i in range(r + 1):
            if not power[i].is_zero():
                head[i] = head[i] + power[i] * b

    hp = _graded_pow(head, p, n)
    for i in range(1, r + 1):
        if hp[i] != F0[i]:
            raise NonPolynomialTail(f"head^p disagrees with f(X+Y)/s_0 at X^{i}")
    tail = {i: hp[i] - F0[i] for i in rep.M0}
    dec = SpecialDecomposition(rep, s, head, hp, tail)
    return normalize_tail(dec)


def recursive_head(f: Poly, rep: RepData):
    """Head numerators by solving for a_1, a_2, ... one at a time.

    a_{l+1} = (s_{l+1}/s_0 - [(1 + a_1 X + ... + a_l X^l)^p]_{l+1}) / p.
    Independent of the series route; used to cross-check it.
    """
    _check_input(f, rep)
    desc = f.desc
    s = taylor_shift(f.with_var("Y"))
    s0 = s[0]
    p, r = rep.p, rep.r
    head = [Poly.one(desc)]
    s0_pow = Poly.one(desc)
    inv_p = Fraction(1, p)
    for l in range(r):
        top = l + 1
        known = _graded_pow(head + [Poly.zero(desc)], p, top)
        target = s[l + 1] * s0_pow
        head.append((target - known[top]) * inv_p)
        s0_pow = s0_pow * s0
    return head


def normalize_tail(dec: SpecialDecomposition) -> SpecialDecomposition:
    """Write A_i s_0^i = c_i N_i with N_i monic (zero tails give c_i = 0, N_i = 0)."""
    desc = dec.desc
    for i, num in dec.tail_num.items():
        if not isinstance(num, Poly):
            raise NonPolynomialTail(f"tail {i} is not polynomial after scaling by s_0^{i}")
        if num.is_zero():
            dec.c[i] = desc.zero()
            dec.N[i] = num
        else:
            dec.c[i] = num.lc
            dec.N[i] = num.monic()
    rep = dec.rep
    n = rep.n
    if dec.c[n] != -1 or dec.N[n] != dec.s0_powers[n - 1]:
        raise NonPolynomialTail("top tail coefficient is not -1/s_0")
    if rep.alpha >= 1:
        expected = rep.p * binom_val(rep.p, rep.p_alpha // rep.p)
        if dec.c[rep.p_alpha].valuation() != expected:
            raise NonPolynomialTail(
                f"v(c_{rep.p_alpha}) = {dec.c[rep.p_alpha].valuation()} differs from {expected}")
    return dec


def _check_input(f: Poly, rep: RepData):
    if f.degree != rep.n:
        raise PreconditionViolation(f"deg f = {f.degree} but the representative data has n = {rep.n}")
    if not f.is_monic():
        raise PreconditionViolation("f must be monic")
    if not f.is_integral():
        raise PreconditionViolation("f must have integral coefficients")


def tail_value(dec: SpecialDecomposition, i: int, y: FieldElement) -> FieldElement:
    """A_i(y) computed from the numerator form."""
    return dec.tail_num[i](y) / (dec.s0(y) ** i)
