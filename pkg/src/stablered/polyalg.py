"""Dense univariate polynomials over a :class:`FieldDescriptor`.

Coefficients are stored lowest degree first.  Products go through a single
big-integer convolution (Kronecker substitution in both the polynomial
variable and the field basis), which keeps the exact arithmetic fast for the
degrees that occur here (a few hundred at most).
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import comb, lcm

from .numfield import (
    INFINITY,
    FieldDescriptor,
    FieldElement,
    _convolve,
    _reduce_raw,
    _spread,
)


class Poly:
    """Immutable dense polynomial; ``coeffs[i]`` multiplies ``var^i``."""

    __slots__ = ("desc", "coeffs", "var")

    def __init__(self, desc: FieldDescriptor, coeffs=(), var: str = "Y"):
        cs = [c if isinstance(c, FieldElement) else desc(c) for c in coeffs]
        while cs and cs[-1].is_zero():
            cs.pop()
        self.desc = desc
        self.coeffs = tuple(cs)
        self.var = var

    # -- constructors -----------------------------------------------------

    @classmethod
    def zero(cls, desc, var="Y"):
        return cls(desc, (), var)

    @classmethod
    def one(cls, desc, var="Y"):
        return cls(desc, (desc.one(),), var)

    @classmethod
    def monomial(cls, desc, degree: int, coeff=1, var="Y"):
        return cls(desc, [desc.zero()] * degree + [desc(coeff)], var)

    @classmethod
    def from_rationals(cls, desc, values, var="Y"):
        return cls(desc, [desc(v) for v in values], var)

    # -- basic accessors --------------------------------------------------------

    @property
    def degree(self) -> int:
        """Degree, with -1 for the zero polynomial."""
        return len(self.coeffs) - 1

    def __len__(self):
        return len(self.coeffs)

    def __getitem__(self, i):
        if 0 <= i < len(self.coeffs):
            return self.coeffs[i]
        return self.desc.zero()

    @property
    def lc(self) -> FieldElement:
        return self.coeffs[-1] if self.coeffs else self.desc.zero()

    def is_zero(self) -> bool:
        return not self.coeffs

    def is_constant(self) -> bool:
        return len(self.coeffs) <= 1

    def is_monic(self) -> bool:
        return bool(self.coeffs) and self.coeffs[-1] == 1

    def with_var(self, var: str) -> "Poly":
        return Poly(self.desc, self.coeffs, var)

    def _check(self, other):
        if not isinstance(other, Poly):
            return False
        if not self.desc.same_field(other.desc):
            raise ValueError("polynomials over different fields")
        if self.var != other.var:
            raise ValueError(f"mixing variables {self.var} and {other.var}")
        return True

    def _lift(self, other):
        if isinstance(other, Poly):
            self._check(other)
            return other
        return Poly(self.desc, [self.desc(other)], self.var)

    # -- ring operations -----------------------------------------------------

    def __add__(self, other):
        other = self._lift(other)
        a, b = self.coeffs, other.coeffs
        if len(a) < len(b):
            a, b = b, a
        out = list(a)
        for i, c in enumerate(b):
            out[i] = out[i] + c
        return Poly(self.desc, out, self.var)

    __radd__ = __add__

    def __neg__(self):
        return Poly(self.desc, [-c for c in self.coeffs], self.var)

    def __sub__(self, other):
        return self + (-self._lift(other))

    def __rsub__(self, other):
        return self._lift(other) - self

    def __mul__(self, other):
        if isinstance(other, Poly):
            self._check(other)
            return Poly(self.desc, poly_mul_coeffs(self.desc, self.coeffs, other.coeffs), self.var)
        if isinstance(other, int):
            return Poly(self.desc, [c * other for c in self.coeffs], self.var)
        c = self.desc(other)
        if c.is_rational():
            q = c.rational()
            return Poly(self.desc, [x.scale(q) for x in self.coeffs], self.var)
        return Poly(self.desc, [x * c for x in self.coeffs], self.var)

    __rmul__ = __mul__

    def __pow__(self, n: int):
        if n < 0:
            raise ValueError("negative polynomial power")
        result = Poly.one(self.desc, self.var)
        base = self
        while n:
            if n & 1:
                result = result * base
            n >>= 1
            if n:
                base = base * base
        return result

    def __eq__(self, other):
        if isinstance(other, Poly):
            return self.desc.same_field(other.desc) and self.coeffs == other.coeffs
        if isinstance(other, (int, Fraction, FieldElement)):
            return self == self._lift(other)
        return NotImplemented

    def __hash__(self):
        return hash(self.coeffs)

    def scale(self, c) -> "Poly":
        return self * c

    def divmod(self, other: "Poly"):
        self._check(other)
        if other.is_zero():
            raise ZeroDivisionError("polynomial division by zero")
        r = list(self.coeffs)
        db = other.degree
        inv = other.lc.inverse()
        if len(r) <= db:
            return Poly.zero(self.desc, self.var), self
        q = [self.desc.zero()] * (len(r) - db)
        bcoeffs = other.coeffs
        for i in range(len(r) - 1 - db, -1, -1):
            c = r[i + db]
            if c.is_zero():
                continue
            c = c * inv
            q[i] = c
            for j in range(db):
                if not bcoeffs[j].is_zero():
                    r[i + j] = r[i + j] - c * bcoeffs[j]
            r[i + db] = self.desc.zero()
        return Poly(self.desc, q, self.var), Poly(self.desc, r[:db], self.var)

    def __floordiv__(self, other):
        return self.divmod(other)[0]

    def __mod__(self, other):
        return self.divmod(other)[1]

    def exact_div(self, other: "Poly") -> "Poly":
        q, r = self.divmod(other)
        if not r.is_zero():
            raise ArithmeticError("polynomial division is not exact")
        return q

    def monic(self) -> "Poly":
        if self.is_zero() or self.lc == 1:
            return self
        inv = self.lc.inverse()
        return Poly(self.desc, [c * inv for c in self.coeffs[:-1]] + [self.desc.one()], self.var)

    def derivative(self) -> "Poly":
        return Poly(self.desc, [c * i for i, c in enumerate(self.coeffs)][1:], self.var)

    # -- evaluation and substitution -----------------------------------------

    def __call__(self, x):
        return evaluate(self, x)

    def shift(self, c) -> "Poly":
        """The polynomial Y -> self(Y + c)."""
        c = self.desc(c)
        if c.is_zero():
            return self
        if c.is_rational():
            q = c.rational()
            return self.shift_by(lambda x: x.scale(q))
        if self.degree >= _SCALED_SHIFT_MIN and _single_pi_row(c):
            return self._shift_scaled(c)
        return self.shift_by(lambda x: x * c)

    def _shift_scaled(self, c) -> "Poly":
        """self(Y + c) as Q(Y/c + 1) with Q(Z) = self(cZ); about 4n products instead of n^2/2."""
        k = c.desc.k
        r = next(i for i, v in enumerate(c.nums) if v) // k
        unit = c.mul_pi_power(-r)  # c = unit * pi^r, unit in Q(u)
        a, power = [], self.desc.one()
        for i, coef in enumerate(self.coeffs):
            a.append((coef * power).mul_pi_power(r * i))
            power = power * unit
        q = Poly(self.desc, a, self.var).shift_by(lambda x: x)
        inv = unit.inverse()
        out, power = [], self.desc.one()
        for i, coef in enumerate(q.coeffs):
            out.append((coef * power).mul_pi_power(-r * i))
            power = power * inv
        return Poly(self.desc, out, self.var)

    def shift_by(self, times) -> "Poly":
        """Taylor shift by an element given only through ``times(x) = c*x``."""
        a = list(self.coeffs)
        n = len(a)
        for i in range(n - 1):
            for j in range(n - 2, i - 1, -1):
                if not a[j + 1].is_zero():
                    a[j] = a[j] + times(a[j + 1])
        return Poly(self.desc, a, self.var)

    def scale_var(self, c) -> "Poly":
        """The polynomial Y -> self(c*Y)."""
        c = self.desc(c)
        out = []
        power = self.desc.one()
        for a in self.coeffs:
            out.append(a * power)
            power = power * c
        return Poly(self.desc, out, self.var)

    def map_coeffs(self, fn, desc=None) -> "Poly":
        return Poly(desc or self.desc, [fn(c) for c in self.coeffs], self.var)

    # -- valuations ----------------------------------------------------------

    def valuations(self):
        return [c.valuation() for c in self.coeffs]

    def min_valuation(self):
        return min((c.valuation() for c in self.coeffs), default=INFINITY)

    def is_integral(self) -> bool:
        return self.min_valuation() >= 0

    # -- presentation ----------------------------------------------------------

    def to_json(self):
        return [c.to_json() for c in self.coeffs]

    @classmethod
    def from_json(cls, desc, data, var="Y"):
        return cls(desc, [FieldElement.from_json(desc, c) for c in data], var)

    def __repr__(self):
        return f"Poly({self})"

    def __str__(self):
        if not self.coeffs:
            return "0"
        terms = []
        for i, c in enumerate(self.coeffs):
            if c.is_zero():
                continue
            cs = str(c)
            if " " in cs:
                cs = f"({cs})"
            mon = "" if i == 0 else (self.var if i == 1 else f"{self.var}^{i}")
            if not mon:
                terms.append(cs)
            elif cs == "1":
                terms.append(mon)
            elif cs == "-1":
                terms.append("-" + mon)
            else:
                terms.append(f"{cs}*{mon}")
        return " + ".join(terms).replace("+ -", "- ")


# ---------------------------------------------------------------------------
# kernels


def poly_mul_coeffs(desc: FieldDescriptor, a, b):
    """Product of two coefficient sequences by one Kronecker convolution."""
    if not a or not b:
        return []
    if len(a) == 1 or len(b) == 1:
        if len(a) == 1:
            a, b = b, a
        c = b[0]
        return [x * c for x in a]
    da = lcm(*(x.den for x in a))
    db = lcm(*(x.den for x in b))
    w = 1 if desc.k == 1 else 2 * desc.k - 1
    stride = (2 * desc.e - 1) * w
    fa = _pack(desc, a, da, stride)
    fb = _pack(desc, b, db, stride)
    raw = _convolve(fa, fb)
    raw = list(raw) + [0] * ((len(a) + len(b) - 1) * stride - len(raw))
    den = da * db
    out = []
    for y in range(len(a) + len(b) - 1):
        nums = _reduce_raw(desc, raw[y * stride:(y + 1) * stride])
        out.append(FieldElement._make(desc, nums, den))
    return out


def _pack(desc, coeffs, den, stride):
    out = [0] * (len(coeffs) * stride)
    for y, x in enumerate(coeffs):
        if x.is_zero():
            continue
        s = den // x.den
        spread = _spread(desc, x.nums)
        base = y * stride
        for t, v in enumerate(spread):
            if v:
                out[base + t] = v * s
    return out


_SCALED_SHIFT_MIN = 6


def _single_pi_row(c) -> bool:
    """c = y * pi^r with y in Q(u); such elements invert cheaply."""
    k = c.desc.k
    return len({i // k for i, v in enumerate(c.nums) if v}) == 1


def evaluate(a: Poly, x) -> FieldElement:
    """Horner evaluation a(x)."""
    x = a.desc(x)
    acc = a.desc.zero()
    if x.is_rational():
        q = x.rational()
        for c in reversed(a.coeffs):
            acc = acc.scale(q) + c
        return acc
    for c in reversed(a.coeffs):
        acc = acc * x + c
    return acc


def taylor_shift(f: Poly, var: str = "Y"):
    """Coefficients s_0..s_n (polynomials in ``var``) of f(X + Y) = sum s_i(Y) X^i."""
    if f.is_zero():
        raise ValueError("taylor_shift of the zero polynomial")
    n = f.degree
    out = []
    for i in range(n + 1):
        coeffs = [f.coeffs[j] * comb(j, i) for j in range(i, n + 1)]
        out.append(Poly(f.desc, coeffs, var))
    return out


def gcd(a: Poly, b: Poly) -> Poly:
    """Monic gcd by the Euclidean algorithm with monic remainders."""
    a._check(b)
    if a.is_zero() and b.is_zero():
        raise ValueError("gcd(0, 0) is undefined")
    a, b = a.monic(), b.monic()
    if a.degree < b.degree:
        a, b = b, a
    while not b.is_zero():
        a, b = b, (a % b).monic()
    return a.monic()


def resultant(a: Poly, b: Poly) -> FieldElement:
    """Res(a, b) by the subresultant pseudo-remainder sequence."""
    a._check(b)
    desc = a.desc
    if a.is_zero() or b.is_zero():
        return desc.zero()
    sign = 1
    if a.degree < b.degree:
        a, b = b, a
        if a.degree % 2 and b.degree % 2:
            sign = -sign
    if b.degree == 0:
        return b.lc ** a.degree * sign
    g = desc.one()
    h = desc.one()
    while True:
        delta = a.degree - b.degree
        if a.degree % 2 and b.degree % 2:
            sign = -sign
        r = pseudo_remainder(a, b)
        a = b
        b = r * (g * h ** delta).inverse()
        g = a.lc
        h = h ** (1 - delta) * g ** delta
        if b.degree <= 0:
            break
    if b.is_zero():
        return desc.zero()
    return h ** (1 - a.degree) * b.lc ** a.degree * sign


def pseudo_remainder(a: Poly, b: Poly) -> Poly:
    """prem(a, b) = lc(b)^(deg a - deg b + 1) * a mod b."""
    delta = a.degree - b.degree
    scaled = a * (b.lc ** (delta + 1))
    return scaled % b
def squarefree_part(a: Poly) -> Poly:
    """Monic product of the distinct irreducible factors (characteristic 0)."""
    if a.is_zero():
        raise ValueError("squarefree part of the zero polynomial")
    if a.degree <= 0:
        return Poly.one(a.desc, a.var)
    return a.exact_div(gcd(a, a.derivative())).monic()


def squarefree_decomposition(a: Poly):
    """Yun's algorithm: list of (factor, multiplicity), factors monic squarefree coprime."""
    if a.is_zero():
        raise ValueError("squarefree decomposition of the zero polynomial")
    out = []
    if a.degree <= 0:
        return out
    a = a.monic()
    d = a.derivative()
    g = gcd(a, d)
    b = a.exact_div(g)
    c = d.exact_div(g)
    dd = c - b.derivative()
    i = 1
    while b.degree > 0:
        h = gcd(b, dd)
        if h.degree > 0:
            out.append((h, i))
        b = b.exact_div(h)
        c = dd.exact_div(h)
        dd = c - b.derivative()
        i += 1
    return out


# ---------------------------------------------------------------------------
# Newton polygons


@dataclass(frozen=True)
class Segment:
    start: int
    end: int
    slope: Fraction

    @property
    def length(self) -> int:
        return self.end - self.start

    @property
    def root_valuation(self) -> Fraction:
        return -self.slope


@dataclass(frozen=True)
class NewtonPolygon:
    """Lower convex hull of the points (i, v(a_i)) with a_i nonzero."""

    vertices: tuple
    ord_zero: int

    @property
    def segments(self):
        return tuple(Segment(i0, i1, Fraction(v1 - v0) / (i1 - i0))
                     for (i0, v0), (i1, v1) in zip(self.vertices, self.vertices[1:]))

    @property
    def degree(self) -> int:
        return self.vertices[-1][0] if self.vertices else 0

    def root_valuations(self):
        """Multiset as a list of (valuation, multiplicity), increasing; zero root last as inf."""
        out = [(s.root_valuation, s.length) for s in reversed(self.segments)]
        if self.ord_zero:
            out.append((INFINITY, self.ord_zero))
        return out

    def roots_above(self, floor):
        """Root valuations strictly greater than ``floor`` (None = all)."""
        return [(v, m) for v, m in self.root_valuations() if floor is None or v > floor]

    def to_json(self):
        return {
            "vertices": [[i, _qstr(v)] for i, v in self.vertices],
            "segments": [{"slope": _qstr(s.slope), "length": s.length} for s in self.segments],
            "ord_zero": self.ord_zero,
        }


def _qstr(q):
    q = Fraction(q)
    return f"{q.numerator}/{q.denominator}"


def newton_polygon(a: Poly) -> NewtonPolygon:
    if a.is_zero():
        raise ValueError("Newton polygon of the zero polynomial")
    return newton_polygon_from_valuations(a.valuations())


def newton_polygon_from_valuations(vals) -> NewtonPolygon:
    pts = [(i, Fraction(v)) for i, v in enumerate(vals) if v != INFINITY]
    ord_zero = pts[0][0]
    hull = []
    for pt in pts:
        while len(hull) >= 2:
            (x1, y1), (x2, y2) = hull[-2], hull[-1]
            # drop the middle point unless it lies strictly below the chord
            if (y2 - y1) * (pt[0] - x1) >= (pt[1] - y1) * (x2 - x1):
                hull.pop()
            else:
                break
        hull.append(pt)
    return NewtonPolygon(tuple(hull), ord_zero)


# ---------------------------------------------------------------------------
# rational functions


class RatFunc:
    """Reduced quotient num/den with monic denominator."""

    __slots__ = ("num", "den")

    def __init__(self, num: Poly, den: Poly | None = None, *, reduce: bool = True):
        if den is None:
            den = Poly.one(num.desc, num.var)
        num._check(den)
        if den.is_zero():
            raise ZeroDivisionError("rational function with zero denominator")
        if reduce and not num.is_zero() and den.degree > 0:
            g = gcd(num, den)
            if g.degree > 0:
                num = num.exact_div(g)
                den = den.exact_div(g)
        if num.is_zero():
            den = Poly.one(num.desc, num.var)
        lc = den.lc
        if lc != 1:
            inv = lc.inverse()
            num, den = num * inv, den.monic()
        self.num = num
        self.den = den

    @property
    def desc(self):
        return self.num.desc

    def is_polynomial(self) -> bool:
        return self.den.degree == 0

    def __add__(self, other):
        other = _as_rat(other, self)
        return RatFunc(self.num * other.den + other.num * self.den, self.den * other.den)

    __radd__ = __add__

    def __neg__(self):
        return RatFunc(-self.num, self.den, reduce=False)

    def __sub__(self, other):
        return self + (-_as_rat(other, self))

    def __rsub__(self, other):
        return _as_rat(other, self) - self

    def __mul__(self, other):
        other = _as_rat(other, self)
        return RatFunc(self.num * other.num, self.den * other.den)

    __rmul__ = __mul__

    def __truediv__(self, other):
        other = _as_rat(other, self)
        if other.num.is_zero():
            raise ZeroDivisionError("division by the zero rational function")
        return RatFunc(self.num * other.den, self.den * other.num)

    def __eq__(self, other):
        if not isinstance(other, RatFunc):
            other = _as_rat(other, self)
        return self.num == other.num and self.den == other.den

    def __hash__(self):
        return hash((self.num, self.den))

    def __call__(self, x):
        return self.num(x) / self.den(x)

    def __repr__(self):
        if self.is_polynomial():
            return f"RatFunc({self.num})"
        return f"RatFunc(({self.num}) / ({self.den}))"


def _as_rat(x, like: RatFunc) -> RatFunc:
    if isinstance(x, RatFunc):
        return x
    if isinstance(x, Poly):
        return RatFunc(x)
    return RatFunc(Poly(like.desc, [like.desc(x)], like.num.var))
