"""Bound report for the field over which the stable model exists.

The field is generated over K by the zeros of L, the radii and p-th roots of
s_0 at the zeros.  The report collects the ramification data visible in the
computation and multiplies it into a coarse degree bound; it is an upper
bound by construction and never claimed to be sharp.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from math import lcm, prod

from .numfield import INFINITY
from .polyalg import newton_polygon
from .reduction import embed_poly

BOUND_LABEL = "heuristic-coarse"


@dataclass
class GGCase:
    m: int
    p: int
    l: int
    s: int
    d: int
    label: str
    exponent: int
    ambiguous: bool

    def to_json(self):
        return {"m": self.m, "p": self.p, "l": self.l, "s": self.s, "d": self.d,
                "case": self.label, "wild_exponent": self.exponent, "ambiguous": self.ambiguous}


def _vp(x: int, p: int) -> int:
    s = 0
    while x % p == 0:
        x //= p
        s += 1
    return s


def remark_gg_case(m: int, p: int) -> GGCase:
    """Write m = l p^s + d with (l, p) = 1, 1 <= d <= p - 1, and the wild exponent bound.

    d = m mod p when that is nonzero and leaves a positive remainder;
    otherwise d is the largest admissible value below m and the case is
    flagged ambiguous.
    """
    if m < 1:
        raise ValueError("m must be positive")
    d = m % p
    ambiguous = d == 0 or m - d == 0
    if ambiguous:
        d = max(1, min(p - 1, m - 1))
    rest = m - d
    if rest <= 0:
        l, s = 0, 0
    else:
        s = _vp(rest, p)
        l = rest // p ** s
    if d != 1:
        label, exponent = "d!=1", 1
    elif l > 1:
        label, exponent = "d=1,l>1", s if p == 2 else s + 1
    else:
        label, exponent = "d=l=1", 2 * s + 1
    return GGCase(m, p, l, s, d, label, exponent, ambiguous)


@dataclass
class Branch:
    valuation: object
    degree: int

    def to_json(self):
        v = self.valuation
        return {"valuation": "inf" if v == INFINITY else f"{v.numerator}/{v.denominator}",
                "degree": self.degree}


@dataclass
class MonodromyBoundReport:
    slope_denominators: list
    branches: list
    radius_denominators: list
    radicand_data: list
    degree_bound: int
    class_sizes: list = field(default_factory=list)
    annotations: dict = field(default_factory=dict)
    label: str = BOUND_LABEL

    @property
    def branch_degrees(self):
        return [b.degree for b in self.branches]

    def to_json(self):
        return {
            "slope_denominators": self.slope_denominators,
            "branches": [b.to_json() for b in self.branches],
            "branch_degrees": self.branch_degrees,
            "radius_denominators": self.radius_denominators,
            "radicand_data": self.radicand_data,
            "degree_bound": self.degree_bound,
            "class_sizes": self.class_sizes,
            "label": self.label,
            "annotations": self.annotations,
        }


def _rel_den(v, e: int) -> int:
    return Fraction(v * e).denominator


def bound_report(md, roots, classes, radii) -> MonodromyBoundReport:
    """Coarse bound for [E:K] from the slopes, branches, radii and classes.

    ``roots`` are the final clusters, ``classes`` the class data and
    ``radii`` the radius valuations per class.  Branches are the Newton
    polygon segments of L at 0 (degree = number of zeros on the segment)
    plus the zero root; the bound is lcm(slope and radius denominators
    relative to K) * prod(branch degrees) * p^(number of classes).
    ``class_sizes`` records how many zeros of L each class gathers.
    """
    L = md.L
    e = L.desc.e
    p = md.p
    np_ = newton_polygon(L)
    slope_dens = sorted({_rel_den(s.root_valuation, e) for s in np_.segments})
    branches = [Branch(s.root_valuation, s.length) for s in np_.segments]
    if np_.ord_zero:
        branches.append(Branch(INFINITY, 1))
    radius_dens = sorted({_rel_den(r, e) for r in radii})
    radicands = []
    for cd in classes:
        root = cd.component.center
        s0c = embed_poly(md.g * md.S0, root.host)(root.value)
        res = s0c.residue()
        radicands.append({
            "s0_valuation": f"{Fraction(s0c.valuation()).numerator}/{Fraction(s0c.valuation()).denominator}",
            "s0_residue": res.to_list(),
            "residue_is_pth_power": res.frobenius_inverse() ** p == res,
        })
    bound = lcm(*slope_dens, *radius_dens) * prod(b.degree for b in branches) * p ** len(classes)
    sizes = [cd.size for cd in classes]
    return MonodromyBoundReport(slope_dens, branches, radius_dens, radicands, bound, sizes,
                                {"remark_gg": remark_gg_case(md.m, p).to_json()})
