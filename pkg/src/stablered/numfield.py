"""Exact arithmetic in K = Q(u, pi) with pi^e = p.

``u`` is a root of an integer lift ``U`` of an irreducible polynomial over
F_p, so Q(u) is unramified at p and ``pi`` is a uniformizer of the unique
extension of the p-adic valuation (normalized by v(p) = 1).

An element is stored as integer numerators ``nums`` over one positive
denominator ``den``; ``nums[j*k + i]`` is the coefficient of u^i pi^j.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from math import gcd, lcm

import gmpy2

from .errors import IncompatibleExtension, NonIntegral, NotPrime, ReducibleModulus
from .residue import ResidueElement, ResidueField, first_irreducible, is_prime

INFINITY = float("inf")


def vp_int(n: int, p: int) -> int:
    """p-adic valuation of a nonzero integer."""
    return int(gmpy2.remove(gmpy2.mpz(n), p)[1])


def vp_rational(q, p: int):
    q = Fraction(q)
    if q == 0:
        return INFINITY
    return vp_int(q.numerator, p) - vp_int(q.denominator, p)


def _parse_modulus(p, residue_modulus):
    if residue_modulus is None:
        return (0, 1)
    if isinstance(residue_modulus, str):
        from .parsing import parse_int_poly
        coeffs = parse_int_poly(residue_modulus, var="u")
    else:
        coeffs = [int(c) for c in residue_modulus]
    coeffs = [c % p for c in coeffs]
    while len(coeffs) > 1 and coeffs[-1] == 0:
        coeffs.pop()
    return tuple(coeffs)


@dataclass(frozen=True)
class FieldDescriptor:
    p: int
    e: int
    residue_modulus: tuple = (0, 1)
    precision_cap: Fraction | None = field(default=None, compare=False)

    def __post_init__(self):
        if not is_prime(self.p):
            raise NotPrime(f"{self.p} is not prime")
        if self.e < 1:
            raise ValueError("ramification index must be >= 1")
        mod = self.residue_modulus
        if len(mod) < 2 or mod[-1] != 1:
            raise ReducibleModulus("residue modulus must be monic of degree >= 1")
        # irreducibility is checked by ResidueField
        self.residue_field

    @property
    def k(self) -> int:
        return len(self.residue_modulus) - 1

    @property
    def degree(self) -> int:
        return self.e * self.k

    @cached_property
    def lift_modulus(self) -> tuple:
        return tuple(int(c) for c in self.residue_modulus)

    @property
    def lambda_p_valuation(self) -> Fraction:
        """v(lambda^p) = p/(p-1) where lambda = zeta_p - 1."""
        return Fraction(self.p, self.p - 1)

    @cached_property
    def residue_field(self) -> ResidueField:
        return ResidueField(self.p, self.residue_modulus)

    def same_field(self, other: "FieldDescriptor") -> bool:
        return (self.p, self.e, self.residue_modulus) == (other.p, other.e, other.residue_modulus)

    # -- constructors --------------------------------------------------------

    def zero(self) -> "FieldElement":
        return FieldElement._make(self, (0,) * self.degree, 1)

    def one(self) -> "FieldElement":
        return self(1)

    def __call__(self, value) -> "FieldElement":
        if isinstance(value, FieldElement):
            if not value.desc.same_field(self):
                raise ValueError("element belongs to a different field")
            return value
        q = Fraction(value)
        nums = [0] * self.degree
        nums[0] = q.numerator
        return FieldElement._make(self, tuple(nums), q.denominator)

    def pi(self) -> "FieldElement":
        return self.pi_power(1)

    def pi_power(self, t: int) -> "FieldElement":
        """pi^t for any integer t (pi^-1 = pi^(e-1)/p)."""
        q, r = divmod(t, self.e)
        nums = [0] * self.degree
        if q >= 0:
            nums[r * self.k] = self.p ** q
            return FieldElement._make(self, tuple(nums), 1)
        nums[r * self.k] = 1
        return FieldElement._make(self, tuple(nums), self.p ** (-q))

    def u(self) -> "FieldElement":
        if self.k == 1:
            # U(u) = u - a has the rational root a
            return self(-self.residue_modulus[0])
        nums = [0] * self.degree
        nums[1] = 1
        return FieldElement._make(self, tuple(nums), 1)

    def from_coeffs(self, matrix) -> "FieldElement":
        """Build from c[i][j] (coefficient of u^i pi^j) rationals."""
        fr = [[Fraction(c) for c in row] for row in matrix]
        if len(fr) > self.k or any(len(row) > self.e for row in fr):
            raise ValueError("coefficient matrix exceeds field dimensions")
        den = 1
        for row in fr:
            for c in row:
                den = lcm(den, c.denominator)
        nums = [0] * self.degree
        for i, row in enumerate(fr):
            for j, c in enumerate(row):
                nums[j * self.k + i] = c.numerator * (den // c.denominator)
        return FieldElement._make(self, tuple(nums), den)

    def lift_residue(self, r: ResidueElement) -> "FieldElement":
        """Lift with coefficients in {0..p-1} in the basis 1, u, ..., u^(k-1)."""
        if r.field != self.residue_field:
            raise ValueError("residue element from a different residue field")
        if self.k == 1:
            return self(r.coeffs[0])
        nums = [0] * self.degree
        for i, c in enumerate(r.coeffs):
            nums[i] = c
        return FieldElement._make(self, tuple(nums), 1)

    def to_json(self) -> dict:
        out = {"p": self.p, "e": self.e, "residue_modulus": list(self.residue_modulus)}
        if self.precision_cap is not None:
            out["precision_cap"] = _frac_str(self.precision_cap)
        return out

    @classmethod
    def from_json(cls, data) -> "FieldDescriptor":
        cap = data.get("precision_cap")
        return make_field(int(data["p"]), int(data["e"]), data.get("residue_modulus"),
                          precision_cap=None if cap is None else Fraction(cap))

    def __repr__(self):
        return f"FieldDescriptor(p={self.p}, e={self.e}, k={self.k})"


def make_field(p: int, e: int = 1, residue_modulus=None, *, precision_cap=None) -> FieldDescriptor:
    """Field descriptor for Q(u, pi), pi^e = p, residue field F_p[u]/(residue_modulus)."""
    if not is_prime(int(p)):
        raise NotPrime(f"{p} is not prime")
    mod = _parse_modulus(int(p), residue_modulus)
    return FieldDescriptor(int(p), int(e), mod,
                           None if precision_cap is None else Fraction(precision_cap))


def _frac_str(q) -> str:
    q = Fraction(q)
    return f"{q.numerator}/{q.denominator}"


def _bits(values) -> int:
    return max((abs(v).bit_length() for v in values), default=0)


class FieldElement:
    """Immutable element of a :class:`FieldDescriptor`."""

    __slots__ = ("desc", "nums", "den", "_val")

    def __init__(self, desc: FieldDescriptor, value=0):
        z = desc(value)
        self.desc, self.nums, self.den, self._val = z.desc, z.nums, z.den, None

    @classmethod
    def _make(cls, desc, nums, den):
        obj = object.__new__(cls)
        g = gcd(den, *nums)
        if g != 1:
            nums = tuple(n // g for n in nums)
            den //= g
        if not any(nums):
            den = 1
        obj.desc, obj.nums, obj.den, obj._val = desc, tuple(nums), den, None
        return obj

    # -- coercion ---------------------------------------------------------

    def _coerce(self, other):
        if isinstance(other, FieldElement):
            if other.desc is not self.desc and not other.desc.same_field(self.desc):
                raise ValueError("mixing elements of different fields")
            return other
        if isinstance(other, (int, Fraction)):
            return self.desc(other)
        return NotImplemented

    # -- ring operations --------------------------------------------------

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        if self.den == other.den:
            return FieldElement._make(self.desc, tuple(a + b for a, b in zip(self.nums, other.nums)), self.den)
        g = gcd(self.den, other.den)
        sa, sb = other.den // g, self.den // g
        return FieldElement._make(self.desc,
                                  tuple(a * sa + b * sb for a, b in zip(self.nums, other.nums)),
                                  self.den * sa)

    __radd__ = __add__

    def __neg__(self):
        return FieldElement._make(self.desc, tuple(-a for a in self.nums), self.den)

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, int):
            return FieldElement._make(self.desc, tuple(a * other for a in self.nums), self.den)
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        nums = _mul_nums(self.desc, self.nums, other.nums)
        return FieldElement._make(self.desc, nums, self.den * other.den)

    __rmul__ = __mul__

    def scale(self, q) -> "FieldElement":
        q = Fraction(q)
        return FieldElement._make(self.desc, tuple(a * q.numerator for a in self.nums), self.den * q.denominator)

    def mul_pi_power(self, t: int) -> "FieldElement":
        """self * pi^t, computed by index shifting."""
        if t == 0 or self.is_zero():
            return self
        d = self.desc
        e, k, p = d.e, d.k, d.p
        nums = [0] * d.degree
        den = self.den
        q0, r0 = divmod(t, e)
        if q0 < 0:
            den *= p ** (-q0)
            q0 = 0
        scale0 = p ** q0
        scale1 = scale0 * p
        for j in range(e):
            jj = j + r0
            s = scale0
            if jj >= e:
                jj -= e
                s = scale1
            base_src, base_dst = j * k, jj * k
            for i in range(k):
                c = self.nums[base_src + i]
                if c:
                    nums[base_dst + i] = c * s
        return FieldElement._make(d, tuple(nums), den)

    def __pow__(self, n: int):
        if n < 0:
            return self.inverse() ** (-n)
        result = self.desc.one()
        base = self
        while n:
            if n & 1:
                result = result * base
            n >>= 1
            if n:
                base = base * base
        return result

    def inverse(self) -> "FieldElement":
        if self.is_zero():
            raise ZeroDivisionError("inverse of zero field element")
        return _inverse(self)

    def __truediv__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        if other.is_rational():
            return self.scale(1 / other.rational())
        return self * other.inverse()

    def __rtruediv__(self, other):
        return self.desc(other) * self.inverse()

    # -- predicates -------------------------------------------------------

    def is_zero(self) -> bool:
        return not any(self.nums)

    def __bool__(self):
        return not self.is_zero()

    def is_rational(self) -> bool:
        return not any(self.nums[1:])

    def rational(self) -> Fraction:
        if not self.is_rational():
            raise ValueError("element is not rational")
        return Fraction(self.nums[0], self.den)

    def __eq__(self, other):
        if isinstance(other, (int, Fraction)):
            other = self.desc(other)
        if not isinstance(other, FieldElement):
            return NotImplemented
        return self.desc.same_field(other.desc) and self.nums == other.nums and self.den == other.den

    def __hash__(self):
        return hash((self.nums, self.den))

    # -- valuation and reduction --------------------------------------------

    def valuation(self):
        """min over nonzero c_ij of v_p(c_ij) + j/e; +inf for zero."""
        if self._val is None:
            self._val = _valuation(self)
        return self._val

    def is_integral(self) -> bool:
        return self.valuation() >= 0

    def residue(self) -> ResidueElement:
        d = self.desc
        F = d.residue_field
        v = self.valuation()
        if v < 0:
            raise NonIntegral(f"residue of element with negative valuation {v}")
        if v > 0:
            return F.zero
        p = d.p
        t = vp_int(self.den, p)
        pt = p ** t
        inv = pow((self.den // pt) % p, -1, p)
        coeffs = [((self.nums[i] // pt) * inv) % p for i in range(d.k)]
        if d.k == 1:
            return F(coeffs[0])
        return F(coeffs)

    def truncate(self, precision: int) -> "FieldElement":
        """An element of Z[u, pi] congruent to self modulo p^precision (self integral)."""
        if self.valuation() < 0:
            raise NonIntegral("cannot truncate a non-integral element")
        mod = self.desc.p ** precision
        inv = pow(self.den % mod, -1, mod) if self.den % self.desc.p else None
        if inv is None:
            # integral with p | den: every numerator is divisible by that p-power
            t = vp_int(self.den, self.desc.p)
            pt = self.desc.p ** t
            inv = pow((self.den // pt) % mod, -1, mod)
            nums = tuple(((n // pt) * inv) % mod for n in self.nums)
        else:
            nums = tuple((n * inv) % mod for n in self.nums)
        return FieldElement._make(self.desc, nums, 1)

    # -- presentation -------------------------------------------------------

    @property
    def coeffs(self):
        """Rational coefficient matrix c[i][j] of u^i pi^j."""
        k, e = self.desc.k, self.desc.e
        return [[Fraction(self.nums[j * k + i], self.den) for j in range(e)] for i in range(k)]

    def to_json(self):
        return [[_frac_str(c) for c in row] for row in self.coeffs]

    @classmethod
    def from_json(cls, desc: FieldDescriptor, data) -> "FieldElement":
        return desc.from_coeffs([[Fraction(c) for c in row] for row in data])

    def __repr__(self):
        return f"FieldElement({self})"

    def __str__(self):
        d = self.desc
        terms = []
        for j in range(d.e):
            for i in range(d.k):
                n = self.nums[j * d.k + i]
                if not n:
                    continue
                c = Fraction(n, self.den)
                mons = []
                if d.k > 1 and i:
                    mons.append("u" if i == 1 else f"u^{i}")
                if j:
                    mons.append("pi" if j == 1 else f"pi^{j}")
                if not mons:
                    terms.append(str(c))
                elif c == 1:
                    terms.append("*".join(mons))
                elif c == -1:
                    terms.append("-" + "*".join(mons))
                else:
                    terms.append(f"{c}*" + "*".join(mons))
        return " + ".join(terms).replace("+ -", "- ") if terms else "0"


# ---------------------------------------------------------------------------
# kernels


def _valuation(x: FieldElement):
    d = x.desc
    p, e, k = d.p, d.e, d.k
    best = None
    for j in range(e):
        base = j * k
        for i in range(k):
            n = x.nums[base + i]
            if n:
                cand = e * vp_int(n, p) + j
                if best is None or cand < best:
                    best = cand
    if best is None:
        return INFINITY
    return Fraction(best - e * vp_int(x.den, p), e)


def _spread(desc: FieldDescriptor, nums):
    """Lay out ``nums`` with stride 2k-1 per pi-power so products never collide."""
    k = desc.k
    if k == 1:
        return list(nums)
    w = 2 * k - 1
    out = [0] * (desc.e * w)
    for j in range(desc.e):
        out[j * w:j * w + k] = nums[j * k:(j + 1) * k]
    return out


def _reduce_raw(desc: FieldDescriptor, raw):
    """Reduce a spread product (length up to (2e-1)(2k-1)) modulo U(u) and pi^e - p."""
    e, k, p = desc.e, desc.k, desc.p
    if k == 1:
        out = list(raw[:e]) + [0] * max(0, e - len(raw))
        for j in range(e, len(raw)):
            out[j - e] += p * raw[j]
        return tuple(out)
    w = 2 * k - 1
    raw = list(raw) + [0] * max(0, (2 * e - 1) * w - len(raw))
    U = desc.lift_modulus
    rows = []
    for j in range(2 * e - 1):
        row = raw[j * w:(j + 1) * w]
        for dd in range(w - 1, k - 1, -1):
            c = row[dd]
            if c:
                for t in range(k):
                    row[dd - k + t] -= c * U[t]
                row[dd] = 0
        rows.append(row[:k])
    for j in range(2 * e - 2, e - 1, -1):
        for i in range(k):
            rows[j - e][i] += p * rows[j][i]
    return tuple(c for j in range(e) for c in rows[j])


def _mul_nums(desc: FieldDescriptor, a, b):
    return _reduce_raw(desc, _convolve(_spread(desc, a), _spread(desc, b)))


_KRONECKER_MIN = 12


def _convolve(a, b):
    """Integer convolution, Kronecker substitution for longer inputs."""
    la, lb = len(a), len(b)
    nz_a = [(i, c) for i, c in enumerate(a) if c]
    nz_b = [(i, c) for i, c in enumerate(b) if c]
    out_len = la + lb - 1
    if min(len(nz_a), len(nz_b)) <= 4 or len(nz_a) * len(nz_b) <= _KRONECKER_MIN * _KRONECKER_MIN:
        out = [0] * out_len
        for i, x in nz_a:
            for j, y in nz_b:
                out[i + j] += x * y
        return out
    width = _bits(a) + _bits(b) + min(la, lb).bit_length() + 2
    pa = 0
    for c in reversed(a):
        pa = (pa << width) + c
    pb = 0
    for c in reversed(b):
        pb = (pb << width) + c
    prod = pa * pb
    mask = (1 << width) - 1
    half = 1 << (width - 1)
    full = 1 << width
    out = []
    for _ in range(out_len):
        low = prod & mask
        if low >= half:
            low -= full
        out.append(low)
        prod = (prod - low) >> width
    return out


def _inverse(x: FieldElement) -> FieldElement:
    """Solve x*y = 1 by Gaussian elimination on the multiplication matrix."""
    d = x.desc
    n = d.degree
    if x.is_rational():
        return d(Fraction(x.den, x.nums[0]))
    k = d.k
    rows_used = {i // k for i, c in enumerate(x.nums) if c}
    if d.e > 1 and len(rows_used) == 1:
        # x = y * pi^r with y in Q(u): invert y in the unramified layer only
        (r,) = rows_used
        base = FieldDescriptor(d.p, 1, d.residue_modulus)
        y = _inverse(FieldElement._make(base, x.nums[r * k:(r + 1) * k], x.den))
        lifted = FieldElement._make(d, tuple(y.nums) + (0,) * (n - k), y.den)
        return lifted.mul_pi_power(-r)
    cols = []
    for idx in range(n):
        basis = [0] * n
        basis[idx] = 1
        cols.append(_mul_nums(d, x.nums, tuple(basis)))
    # rows of the augmented system M y = den * e_0 (x = nums/den)
    rows = [[gmpy2.mpq(cols[c][r]) for c in range(n)] + [gmpy2.mpq(x.den if r == 0 else 0)]
            for r in range(n)]
    for col in range(n):
        piv = next(r for r in range(col, n) if rows[r][col] != 0)
        rows[col], rows[piv] = rows[piv], rows[col]
        inv = 1 / rows[col][col]
        prow = [v * inv for v in rows[col]]
        rows[col] = prow
        for r in range(n):
            if r != col and rows[r][col] != 0:
                f = rows[r][col]
                rows[r] = [a - f * b for a, b in zip(rows[r], prow)]
    sol = [Fraction(int(rows[r][n].numerator), int(rows[r][n].denominator)) for r in range(n)]
    den = 1
    for s in sol:
        den = lcm(den, s.denominator)
    return FieldElement._make(d, tuple(s.numerator * (den // s.denominator) for s in sol), den)


# ---------------------------------------------------------------------------
# extensions


@dataclass(frozen=True)
class Embedding:
    """Exact embedding of ``source`` into ``target`` (pi -> pi'^ratio, u -> image)."""

    source: FieldDescriptor
    target: FieldDescriptor
    ratio: int

    def __call__(self, x: FieldElement) -> FieldElement:
        if not x.desc.same_field(self.source):
            raise ValueError("element is not in the embedding's source field")
        s, t = self.source, self.target
        if s.k == 1:
            nums = [0] * t.degree
            for j in range(s.e):
                nums[j * self.ratio * t.k] = x.nums[j]
            return FieldElement._make(t, tuple(nums), x.den)
        # same residue modulus: u -> u'
        nums = [0] * t.degree
        for j in range(s.e):
            for i in range(s.k):
                nums[j * self.ratio * t.k + i] = x.nums[j * s.k + i]
        return FieldElement._make(t, tuple(nums), x.den)


def extend_field(desc: FieldDescriptor, new_e: int, new_residue_modulus=None):
    """Extension with ramification ``new_e`` and a residue field containing the old one.

    Returns ``(new_descriptor, embedding)``.  Since pi'^new_e = p exactly, pi
    maps to pi'^(new_e/e) with no root-of-unity correction.  For k = 1 the
    old generator is the rational root of its linear modulus; for k > 1 the
    residue modulus must stay the same, since embedding into another
    residue field would need a root of the old modulus there.
    """
    if new_e % desc.e:
        raise IncompatibleExtension(f"ramification {desc.e} does not divide {new_e}")
    if new_residue_modulus is None:
        mod = desc.residue_modulus
    else:
        mod = _parse_modulus(desc.p, new_residue_modulus)
    new_k = len(mod) - 1
    if new_k % desc.k:
        raise IncompatibleExtension(f"residue degree {desc.k} does not divide {new_k}")
    if desc.k > 1 and tuple(mod) != tuple(desc.residue_modulus):
        raise IncompatibleExtension("residue escalation is only exact from k = 1 base fields")
    target = FieldDescriptor(desc.p, new_e, tuple(mod), desc.precision_cap)
    return target, Embedding(desc, target, new_e // desc.e)


def escalate(desc: FieldDescriptor, e_factor: int = 1, k_target: int | None = None):
    """Convenience wrapper choosing the canonical modulus for the new residue degree."""
    k_new = desc.k if k_target is None else k_target
    mod = desc.residue_modulus if k_new == desc.k else first_irreducible(desc.p, k_new)
    return extend_field(desc, desc.e * e_factor, mod)


def identity_embedding(desc: FieldDescriptor) -> Embedding:
    return Embedding(desc, desc, 1)


def compose(first: Embedding, second: Embedding) -> Embedding:
    if not first.target.same_field(second.source):
        raise ValueError("embeddings do not compose")
    if first.source.k > 1 and first.source.residue_modulus != second.target.residue_modulus:
        raise IncompatibleExtension("cannot compose residue escalations from k > 1")
    return Embedding(first.source, second.target, first.ratio * second.ratio)


def frobenius_inverse(c: ResidueElement) -> ResidueElement:
    return c.frobenius_inverse()


def valuation(x: FieldElement):
    return x.valuation()


def residue(x: FieldElement) -> ResidueElement:
    return x.residue()

