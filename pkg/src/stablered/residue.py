"""Finite residue fields F_{p^k} and dense polynomials over them.

Elements are tuples of integers mod p (ascending powers of the generator)
reduced modulo a monic irreducible polynomial.  Polynomials over the field
are plain lists of :class:`ResidueElement`, lowest degree first.
"""

from __future__ import annotations

from functools import cached_property
from itertools import product
from math import lcm

import gmpy2

from .errors import NotPrime, ReducibleModulus


def is_prime(n: int) -> bool:
    return n >= 2 and bool(gmpy2.is_prime(n))


class ResidueField:
    """The field F_p[u]/(modulus) with ``modulus`` monic irreducible of degree k."""

    def __init__(self, p: int, modulus=(0, 1), *, check: bool = True):
        if not is_prime(p):
            raise NotPrime(f"{p} is not prime")
        modulus = tuple(int(c) % p for c in modulus)
        while len(modulus) > 1 and modulus[-1] == 0:
            modulus = modulus[:-1]
        if len(modulus) < 2 or modulus[-1] != 1:
            raise ReducibleModulus(f"residue modulus {modulus} must be monic of degree >= 1")
        self.p = p
        self.modulus = modulus
        self.k = len(modulus) - 1
        self.q = p ** self.k
        if check and self.k > 1 and not _is_irreducible_mod_p(p, modulus):
            raise ReducibleModulus(f"{modulus} is reducible over F_{p}")

    def __eq__(self, other):
        return (isinstance(other, ResidueField) and self.p == other.p
                and self.modulus == other.modulus)

    def __hash__(self):
        return hash((self.p, self.modulus))

    def __repr__(self):
        return f"ResidueField(p={self.p}, modulus={self.modulus})"

    # -- element construction ----------------------------------------------

    def __call__(self, value) -> "ResidueElement":
        if isinstance(value, ResidueElement):
            if value.field != self:
                raise ValueError("element belongs to a different residue field")
            return value
        if isinstance(value, int):
            return ResidueElement(self, (value % self.p,) + (0,) * (self.k - 1))
        coeffs = [int(c) % self.p for c in value]
        return ResidueElement(self, self._reduce(coeffs))

    @cached_property
    def zero(self) -> "ResidueElement":
        return self(0)

    @cached_property
    def one(self) -> "ResidueElement":
        return self(1)

    @cached_property
    def gen(self) -> "ResidueElement":
        return self([0, 1])

    def elements(self):
        """All q elements, in a fixed order (0 first, then base-p counting)."""
        for digits in product(range(self.p), repeat=self.k):
            yield ResidueElement(self, tuple(reversed(digits)))

    def from_index(self, index: int) -> "ResidueElement":
        digits = []
        for _ in range(self.k):
            index, d = divmod(index, self.p)
            digits.append(d)
        return ResidueElement(self, tuple(digits))

    # -- arithmetic kernels on coefficient tuples ----------------------------

    def _reduce(self, coeffs):
        p, k, mod = self.p, self.k, self.modulus
        coeffs = list(coeffs) + [0] * max(0, k - len(coeffs))
        for d in range(len(coeffs) - 1, k - 1, -1):
            c = coeffs[d] % p
            if c:
                for t in range(k):
                    coeffs[d - k + t] -= c * mod[t]
            coeffs[d] = 0
        return tuple(c % p for c in coeffs[:k])

    def _mul(self, a, b):
        if self.k == 1:
            return ((a[0] * b[0]) % self.p,)
        out = [0] * (2 * self.k - 1)
        for i, x in enumerate(a):
            if x:
                for j, y in enumerate(b):
                    if y:
                        out[i + j] += x * y
        return self._reduce(out)


class ResidueElement:
    __slots__ = ("field", "coeffs")

    def __init__(self, field: ResidueField, coeffs):
        self.field = field
        self.coeffs = tuple(coeffs)

    def _coerce(self, other):
        if isinstance(other, ResidueElement):
            if other.field != self.field:
                raise ValueError("mixing elements of different residue fields")
            return other
        if isinstance(other, int):
            return self.field(other)
        return NotImplemented

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        p = self.field.p
        return ResidueElement(self.field, tuple((a + b) % p for a, b in zip(self.coeffs, other.coeffs)))

    __radd__ = __add__

    def __neg__(self):
        p = self.field.p
        return ResidueElement(self.field, tuple((-a) % p for a in self.coeffs))

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return ResidueElement(self.field, self.field._mul(self.coeffs, other.coeffs))

    __rmul__ = __mul__

    def __pow__(self, n: int):
        if n < 0:
            return self.inverse() ** (-n)
        result = self.field.one
        base = self
        while n:
            if n & 1:
                result = result * base
            base = base * base
            n >>= 1
        return result

    def inverse(self):
        if self.is_zero():
            raise ZeroDivisionError("inverse of zero in residue field")
        return self ** (self.field.q - 2)

    def __truediv__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self * other.inverse()

    def is_zero(self) -> bool:
        return not any(self.coeffs)

    def __bool__(self):
        return not self.is_zero()

    def __eq__(self, other):
        if isinstance(other, int):
            other = self.field(other)
        return (isinstance(other, ResidueElement) and self.field == other.field
                and self.coeffs == other.coeffs)

    def __hash__(self):
        return hash(self.coeffs)

    def index(self) -> int:
        """Position of this element in :meth:`ResidueField.elements` order."""
        n = 0
        for c in reversed(self.coeffs):
            n = n * self.field.p + c
        return n

    def frobenius(self):
        return self ** self.field.p

    def frobenius_inverse(self):
        """The unique d with d^p == self."""
        return self ** (self.field.q // self.field.p)

    def __repr__(self):
        terms = []
        for i, c in enumerate(self.coeffs):
            if c:
                if i == 0:
                    terms.append(str(c))
                else:
                    mon = "u" if i == 1 else f"u^{i}"
                    terms.append(mon if c == 1 else f"{c}*{mon}")
        return " + ".join(terms) if terms else "0"

    def to_list(self):
        return list(self.coeffs)


# ---------------------------------------------------------------------------
# polynomials over a residue field (lists of elements, lowest degree first)

def poly_trim(a):
    a = list(a)
    while a and a[-1].is_zero():
        a.pop()
    return a


def poly_deg(a) -> int:
    return len(a) - 1


def poly_add(a, b):
    n = max(len(a), len(b))
    F = (a or b)[0].field
    out = [(a[i] if i < len(a) else F.zero) + (b[i] if i < len(b) else F.zero) for i in range(n)]
    return poly_trim(out)


def poly_sub(a, b):
    return poly_add(a, [-c for c in b])


def poly_mul(a, b):
    if not a or not b:
        return []
    F = a[0].field
    out = [F.zero] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        if x:
            for j, y in enumerate(b):
                out[i + j] = out[i + j] + x * y
    return poly_trim(out)


def poly_divmod(a, b):
    b = poly_trim(b)
    if not b:
        raise ZeroDivisionError("polynomial division by zero")
    a = poly_trim(a)
    F = b[0].field
    if len(a) < len(b):
        return [], a
    inv = b[-1].inverse()
    a = list(a)
    q = [F.zero] * (len(a) - len(b) + 1)
    for i in range(len(a) - len(b), -1, -1):
        c = a[i + len(b) - 1] * inv
        q[i] = c
        if c:
            for j, y in enumerate(b):
                a[i + j] = a[i + j] - c * y
    return poly_trim(q), poly_trim(a[: len(b) - 1])


def poly_monic(a):
    a = poly_trim(a)
    if not a:
        return a
    inv = a[-1].inverse()
    return [c * inv for c in a]


def poly_gcd(a, b):
    a, b = poly_trim(a), poly_trim(b)
    while b:
        a, b = b, poly_divmod(a, b)[1]
    return poly_monic(a)


def poly_deriv(a):
    return poly_trim([c * i for i, c in enumerate(a)][1:])


def poly_eval(a, x):
    acc = x.field.zero
    for c in reversed(a):
        acc = acc * x + c
    return acc


def poly_powmod(a, n: int, m):
    F = m[0].field
    result = [F.one]
    base = poly_divmod(a, m)[1]
    while n:
        if n & 1:
            result = poly_divmod(poly_mul(result, base), m)[1]
        base = poly_divmod(poly_mul(base, base), m)[1]
        n >>= 1
    return result


def _pth_root_poly(a):
    p = a[0].field.p
    return poly_trim([a[i].frobenius_inverse() for i in range(0, len(a), p)])


def poly_radical(a):
    """Monic product of the distinct irreducible factors of ``a``."""
    a = poly_monic(a)
    if len(a) <= 1:
        return a
    d = poly_deriv(a)
    if not d:
        return poly_radical(_pth_root_poly(a))
    g = poly_gcd(a, d)
    r = poly_divmod(a, g)[0]
    if len(g) <= 1:
        return poly_monic(r)
    rg = poly_radical(g)
    common = poly_gcd(r, rg)
    return poly_monic(poly_divmod(poly_mul(r, rg), common)[0])


def splitting_degree(a) -> int:
    """Smallest d such that ``a`` splits into linear factors over F_{q^d}.

    Distinct-degree factorization: the lcm of the degrees of the irreducible factors.
    """
    rad = poly_radical(a)
    if len(rad) <= 2:
        return 1
    F = rad[0].field
    x = [F.zero, F.one]
    power = x
    out = 1
    d = 0
    while len(rad) > 2:
        d += 1
        if 2 * d > len(rad) - 1:
            # what is left is irreducible
            return lcm_all([out, len(rad) - 1])
        power = poly_powmod(power, F.q, rad)
        g = poly_gcd(rad, poly_sub(power, x))
        if len(g) > 1:
            out = lcm_all([out, d])
            rad = poly_divmod(rad, g)[0]
            power = poly_divmod(power, rad)[1] if len(rad) > 1 else power
    return out


def root_multiplicity(a, root) -> int:
    lin = [-root, root.field.one]
    mult = 0
    a = poly_trim(a)
    while len(a) > 1:
        q, r = poly_divmod(a, lin)
        if r:
            break
        a = q
        mult += 1
    return mult


def roots_with_multiplicity(a):
    """Roots of ``a`` in its coefficient field, in element order, with multiplicities."""
    a = poly_trim(a)
    if len(a) <= 1:
        return []
    F = a[0].field
    rad = poly_radical(a)
    x = [F.zero, F.one]
    # the split part gcd(rad, x^q - x) has exactly the rational roots
    split = poly_gcd(rad, poly_sub(poly_powmod(x, F.q, rad), x)) if len(rad) > 2 else rad
    if len(split) <= 1:
        return []
    roots = sorted(_split_linear(split), key=lambda z: z.index())
    return [(z, root_multiplicity(a, z)) for z in roots]


def _split_linear(s):
    """Roots of a monic product of distinct linear factors, by equal-degree splitting.

    The splitting elements run through the field in a fixed order, so the
    result does not depend on any random state.
    """
    if len(s) == 2:
        return [-s[0]]
    F = s[0].field
    x = [F.zero, F.one]
    for idx in range(1 if F.p == 2 else 0, F.q):
        c = F.from_index(idx)
        if F.p == 2:
            # absolute trace of c x: each root r goes to Tr(c r) in F_2
            term = poly_divmod([F.zero, c], s)[1]
            h = term
            for _ in range(F.k - 1):
                term = poly_powmod(term, 2, s)
                h = poly_add(h, term)
        else:
            h = poly_sub(poly_powmod([c, F.one], (F.q - 1) // 2, s), [F.one])
        g = poly_gcd(s, h) if poly_trim(h) else s
        if 1 < len(g) < len(s):
            return _split_linear(g) + _split_linear(poly_divmod(s, g)[0])
    raise AssertionError("no splitting element found")


def _is_irreducible_mod_p(p: int, modulus) -> bool:
    F = ResidueField(p, (0, 1), check=False)
    f = [F(c) for c in modulus]
    k = len(f) - 1
    x = [F.zero, F.one]
    power = x
    for _ in range(1, k // 2 + 1):
        power = poly_powmod(power, p, f)
        if len(poly_gcd(f, poly_sub(power, x))) > 1:
            return False
    return True


def first_irreducible(p: int, k: int):
    """Deterministic choice of a monic irreducible degree-k modulus over F_p.

    Degree one gives ``u`` itself; otherwise candidates are scanned in
    increasing base-p order of their lower coefficients.
    """
    if k == 1:
        return (0, 1)
    for n in range(p ** k):
        lower = []
        t = n
        for _ in range(k):
            t, d = divmod(t, p)
            lower.append(d)
        cand = tuple(lower) + (1,)
        if cand[0] != 0 and _is_irreducible_mod_p(p, cand):
            return cand
    raise AssertionError("no irreducible polynomial found")


def lcm_all(values):
    out = 1
    for v in values:
        out = lcm(out, v)
    return out
