"""Certified p-adic root isolation by Newton polygons and residual polynomials.

Roots are isolated as *clusters*: a center c in the host field together with
a floor level, standing for the roots y of the target polynomial T with
v(y - c) > floor.  The Newton polygon of T(Y + c) gives the exact number of
such roots and the smallest distance gamma = min v(y - c) among them, so a
cluster is a certificate in its own right: every root it stands for lies in
the disc v(y - c) >= gamma.

A cluster is refined by reading the residual polynomial of its lowest slope:
each residual root zeta gives a child centered at c + lift(zeta) * pi^(e*gamma)
and the remaining deeper roots form a child with the same center.  When the
slope is not integral in the host, or a residual polynomial does not split,
the whole computation restarts in a larger host field.  A cluster of size
one always refines inside its host, so single roots can be approximated to
any precision; optionally with Newton steps once Hensel's condition holds.

Distances between final clusters come from the refinement tree: two clusters
that separated at a node lie at distance exactly that node's gamma.
"""

from __future__ import annotations

import itertools
import logging
from dataclasses import dataclass, field
from fractions import Fraction
from math import comb, lcm

from .errors import (
    EscalationLimit,
    IncompatibleExtension,
    PrecisionCapExceeded,
    ResidueFieldTooSmall,
)
from .numfield import INFINITY, FieldDescriptor, FieldElement, extend_field
from .polyalg import Poly, gcd, newton_polygon
from .residue import first_irreducible, roots_with_multiplicity, splitting_degree

log = logging.getLogger(__name__)

DEFAULT_PRECISION_CAP = Fraction(512)
DEFAULT_MAX_EXTENSION = 512


class _ExactZero:
    """Marker for a polynomial that vanishes identically on a cluster."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "ExactZero"

    def __reduce__(self):
        return (_ExactZero, ())


EXACT_ZERO = _ExactZero()


class NeedEscalation(Exception):
    """Control flow: the host field is too small for the next refinement step."""

    def __init__(self, e: int = 1, k: int = 1):
        super().__init__(f"need ramification {e} and residue degree {k}")
        self.e = e
        self.k = k


class NeedsRefinement(Exception):
    """A certificate could not be produced at the current cluster size."""


# ---------------------------------------------------------------------------
# Newton polygon helpers


def roots_above(poly: Poly, floor):
    """[(v, mult)] of roots z of ``poly`` with v(z) > floor, increasing (inf = zero root)."""
    return newton_polygon(poly).roots_above(floor)


def residual_polynomial(F: Poly, segment):
    """Residual polynomial of a Newton polygon segment and its variable's degree.

    With e*slope = -h/d in lowest terms, substitute Y^d = pi^h Z; the residual
    has degree length/d and its roots give the leading digits of the roots on
    the segment.
    """
    desc = F.desc
    es = -segment.slope * desc.e
    h, d = es.numerator, es.denominator
    e0 = int(F[segment.start].valuation() * desc.e)
    field = desc.residue_field
    coeffs = []
    for j in range(segment.length // d + 1):
        a = F[segment.start + j * d]
        if a.is_zero():
            coeffs.append(field.zero)
            continue
        coeffs.append(a.mul_pi_power(j * h - e0).residue())
    return coeffs, d


def slope_split(F: Poly):
    """Per segment: (slope, residual polynomial over the residue field, length).

    Zero roots are factored out first.
    """
    if F.is_zero():
        raise ValueError("slope_split of the zero polynomial")
    np_ = newton_polygon(F)
    G = Poly(F.desc, F.coeffs[np_.ord_zero:], F.var)
    out = []
    for seg in newton_polygon(G).segments:
        res, _ = residual_polynomial(G, seg)
        out.append((seg.slope, res, seg.length))
    return out


# ---------------------------------------------------------------------------
# clusters


@dataclass
class ClusterNode:
    center: FieldElement
    floor: object  # Fraction, or None for "all roots"
    count: int
    gamma: object  # Fraction or INFINITY
    lineage: tuple
    shifted: dict
    data: dict = field(default_factory=dict)
    _np_cache: dict = field(default_factory=dict, repr=False)

    def roots_above(self, name: str):
        """Root valuations of the tracked polynomial ``name`` about the center, above the floor."""
        if name not in self._np_cache:
            self._np_cache[name] = newton_polygon(self.shifted[name]).root_valuations()
        return [(v, m) for v, m in self._np_cache[name] if self.floor is None or v > self.floor]

    def all_roots(self, name: str):
        """All root valuations of the tracked polynomial ``name`` about the center."""
        self.roots_above(name)
        return self._np_cache[name]

    def count_in_cluster(self, name: str) -> int:
        return sum(m for _, m in self.roots_above(name))

    @property
    def is_exact(self) -> bool:
        return self.gamma == INFINITY

    @property
    def center_valuation(self):
        return self.center.valuation()


@dataclass
class ApproxRoot:
    """A cluster of ``cluster_size`` roots y with v(y - value) >= error_valuation."""

    host: FieldDescriptor
    value: FieldElement
    error_valuation: object
    multiplicity: int
    slope: object
    cluster_size: int = 1
    floor: object = None
    target: Poly | None = None
    lineage: tuple = ()
    data: dict = field(default_factory=dict)

    @property
    def is_exact(self) -> bool:
        return self.error_valuation == INFINITY

    def certificate(self):
        """Newton polygon data proving the cluster: roots of target(Y + value) above floor."""
        return roots_above(self.target.shift(self.value), self.floor)

    def to_json(self):
        return {
            "host": self.host.to_json(),
            "value": self.value.to_json(),
            "error_valuation": _ser(self.error_valuation),
            "multiplicity": self.multiplicity,
            "slope": _ser(self.slope),
            "cluster_size": self.cluster_size,
        }


def _ser(q):
    if q == INFINITY:
        return "inf"
    if q is None:
        return None
    q = Fraction(q)
    return f"{q.numerator}/{q.denominator}"


class RootIsolator:
    """Refinement engine over a fixed host field.

    ``tracked`` maps names to host polynomials that are kept shifted to every
    cluster center; the name ``"target"`` is the squarefree polynomial whose
    roots are isolated.  ``stop(node)`` decides whether a cluster is final.
    """

    def __init__(self, tracked: dict, stop, *, precision_cap=None, newton_gap=None):
        self.tracked = tracked
        self.host = tracked["target"].desc
        self.stop = stop
        self.cap = DEFAULT_PRECISION_CAP if precision_cap is None else Fraction(precision_cap)
        self.newton_gap = newton_gap
        self._ids = itertools.count()

    # -- construction ------------------------------------------------------

    def root_node(self) -> ClusterNode:
        shifted = dict(self.tracked)
        return self._node(self.host.zero(), None, shifted, ())

    def node_at(self, center: FieldElement, floor, lineage=()) -> ClusterNode:
        shifted = {name: poly.shift(center) for name, poly in self.tracked.items()}
        return self._node(center, floor, shifted, lineage)

    def _node(self, center, floor, shifted, parent_lineage):
        node = ClusterNode(center, floor, 0, INFINITY, (), shifted)
        above = node.roots_above("target")
        node.count = sum(m for _, m in above)
        node.gamma = above[0][0] if above else INFINITY
        node.lineage = parent_lineage + ((next(self._ids), node.gamma),)
        return node

    # -- refinement ----------------------------------------------------------

    def children(self, node: ClusterNode):
        """Children in deterministic order: digit children by residual root, then deeper roots."""
        if node.is_exact or node.count == 0:
            return []
        host = self.host
        s = node.gamma
        es = s * host.e
        if es.denominator != 1:
            raise NeedEscalation(e=lcm(host.e, s.denominator))
        target = node.shifted["target"]
        seg = next(sg for sg in newton_polygon(target).segments if sg.root_valuation == s)
        residual, _ = residual_polynomial(target, seg)
        found = roots_with_multiplicity(residual)
        if sum(m for _, m in found) < seg.length:
            raise NeedEscalation(k=host.k * splitting_degree(residual))
        out = []
        t = int(es)
        for zeta, mult in found:
            mult_fn, delta = self._digit(zeta, t)
            if host.k == 1:
                shifted = {name: poly.shift_by(mult_fn) for name, poly in node.shifted.items()}
            else:
                shifted = {name: poly.shift(delta) for name, poly in node.shifted.items()}
            out.append(self._node(node.center + delta, s, shifted, node.lineage))
        if node.count > seg.length:
            out.append(self._node(node.center, s, node.shifted, node.lineage))
        return out

    def _digit(self, zeta, t):
        host = self.host
        if host.k == 1:
            z = zeta.coeffs[0]
            if z == 1:
                return (lambda x: x.mul_pi_power(t)), host.pi_power(t)
            return (lambda x: x.mul_pi_power(t) * z), host.pi_power(t) * z
        lift = host.lift_residue(zeta)
        return (lambda x: (x * lift).mul_pi_power(t)), lift.mul_pi_power(t)

    def _check_cap(self, node):
        if node.gamma != INFINITY and node.gamma > self.cap:
            raise PrecisionCapExceeded(
                f"refinement reached gamma = {node.gamma} beyond the cap {self.cap}")

    def run(self):
        """Final clusters in depth-first order."""
        final = []
        stack = [self.root_node()]
        while stack:
            node = stack.pop()
            if node.count == 0:
                continue
            if self.stop(node):
                final.append(node)
                continue
            self._check_cap(node)
            if self.newton_gap is not None and node.count == 1 and not node.is_exact:
                improved = self.newton_step(node)
                if improved is not None:
                    stack.append(improved)
                    continue
            stack.extend(reversed(self.children(node)))
        return final

    def refine_single(self, node: ClusterNode) -> ClusterNode:
        """One refinement step of a single-root cluster (stays inside the host)."""
        if node.count != 1:
            raise NeedsRefinement("only single-root clusters can be refined in place")
        self._check_cap(node)
        kids = self.children(node)
        return next(k for k in kids if k.count == 1)

    def newton_step(self, node: ClusterNode):
        """Newton update for a single root once v(T(c)) > 2 v(T'(c)); None if not applicable."""
        T = node.shifted["target"]
        val0 = T[0].valuation()
        val1 = T[1].valuation()
        if val1 == INFINITY or not val0 > 2 * val1:
            return None
        step = T[0] / T[1]
        target_gamma = self.newton_gap
        # round the new center to a precision a little beyond what is needed
        digits = int((2 * (val0 - val1) + target_gamma + 2) * self.host.e) + 1
        new_center = _round_element(node.center - step, digits)
        if (new_center - node.center).valuation() < node.gamma:
            return None
        new = self.node_at(new_center, node.floor, node.lineage[:-1])
        if new.count != 1 or not new.gamma > node.gamma:
            return None
        return new


def _round_element(x: FieldElement, digits: int) -> FieldElement:
    """An element congruent to x modulo pi^digits (x need not be integral)."""
    if x.is_zero():
        return x
    desc = x.desc
    v = x.valuation()
    shift = 0
    if v < 0:
        shift = int(-v * desc.e) + 1
    scaled = x.mul_pi_power(shift)
    prec = -(-(digits + shift) // desc.e) + 1
    return scaled.truncate(prec).mul_pi_power(-shift)


# ---------------------------------------------------------------------------
# host fields and escalation


def host_field(base: FieldDescriptor, e: int, k: int, cap=None):
    """Extension of ``base`` with ramification e and residue degree k, and its embedding."""
    mod = base.residue_modulus if k == base.k else first_irreducible(base.p, k)
    try:
        host, emb = extend_field(base, e, mod)
    except IncompatibleExtension as exc:
        raise ResidueFieldTooSmall(
            f"residue degree {k} requested over a base residue field of degree {base.k}: {exc}") from exc
    if cap is not None:
        host = FieldDescriptor(host.p, host.e, host.residue_modulus, Fraction(cap))
        emb = type(emb)(emb.source, host, emb.ratio)
    return host, emb


def initial_ramification(base: FieldDescriptor, poly: Poly) -> int:
    """Smallest multiple of e making every root valuation of ``poly`` integral in pi-units."""
    e = base.e
    for v, _ in newton_polygon(poly).root_valuations():
        if v != INFINITY:
            e = lcm(e, Fraction(v).denominator)
    return e


def run_with_escalation(base: FieldDescriptor, polys: dict, make_stop, *, max_extension=None,
                        precision_cap=None, start=None, newton_gap=None):
    """Run the isolator, restarting in larger hosts until every refinement fits.

    ``polys`` are polynomials over ``base`` (with key "target"); ``make_stop``
    receives the host, the embedding and the embedded polynomials and returns
    the stop predicate.  Returns (host, embedding, embedded polys, final nodes).
    """
    limit = DEFAULT_MAX_EXTENSION if max_extension is None else max_extension
    e, k = start or (initial_ramification(base, polys["target"]), base.k)
    while True:
        if (e // base.e) * (k // base.k) > limit:
            raise EscalationLimit(f"host of relative degree {(e // base.e) * (k // base.k)} exceeds {limit}")
        host, emb = host_field(base, e, k)
        tracked = {name: p.map_coeffs(emb, host) for name, p in polys.items()}
        stop = make_stop(host, emb, tracked)
        iso = RootIsolator(tracked, stop, precision_cap=precision_cap, newton_gap=newton_gap)
        try:
            final = iso.run()
        except NeedEscalation as need:
            log.info("escalating host from (e=%d, k=%d) by %s", e, k, need)
            e = lcm(e, need.e)
            k = lcm(k, need.k)
            continue
        return host, emb, tracked, final, iso


# ---------------------------------------------------------------------------
# public operations


def _default_stop(target_gamma):
    def stop(node: ClusterNode) -> bool:
        if node.is_exact:
            return node.count == 1
        if node.count != 1:
            return False
        if not node.center.valuation() < node.gamma:
            return False
        return target_gamma is None or node.gamma >= target_gamma
    return stop


def isolate_roots(F: Poly, target_gamma=None, *, max_extension=None, precision_cap=None):
    """All roots of F as single-root ApproxRoots with error_valuation >= target_gamma.

    F is replaced by its squarefree part; multiplicities are tracked with a
    squarefree decomposition.  Hosts are escalated as needed.
    """
    from .polyalg import squarefree_decomposition, squarefree_part

    if F.is_zero():
        raise ValueError("isolate_roots of the zero polynomial")
    base = F.desc
    sqf = squarefree_part(F)
    pieces = squarefree_decomposition(F)
    polys = {"target": sqf}
    for idx, (piece, mult) in enumerate(pieces):
        polys[f"mult:{mult}"] = piece
    target = None if target_gamma is None else Fraction(target_gamma)

    def make_stop(host, emb, tracked):
        return _default_stop(target)

    gap = None if target is None else target
    host, emb, tracked, final, _ = run_with_escalation(
        base, polys, make_stop, max_extension=max_extension,
        precision_cap=precision_cap if precision_cap is not None else base.precision_cap,
        newton_gap=gap)
    return [_to_approx(node, host, tracked) for node in final]


def cluster_multiplicity(node: ClusterNode):
    """Multiplicity shared by the cluster's roots, read from tracked "mult:i" pieces."""
    for name in node.shifted:
        if name.startswith("mult:") and node.count_in_cluster(name):
            return int(name.split(":")[1])
    return 1


def cluster_slope(node: ClusterNode):
    """Common valuation v(y) of the cluster's roots, or None if not common."""
    vc = node.center.valuation()
    if vc < node.gamma:
        return vc
    if node.center.is_zero():
        above = node.roots_above("target")
        if len(above) == 1:
            return above[0][0]
    return None


def _to_approx(node: ClusterNode, host, tracked) -> ApproxRoot:
    return ApproxRoot(
        host=host,
        value=node.center,
        error_valuation=node.gamma,
        multiplicity=cluster_multiplicity(node),
        slope=cluster_slope(node),
        cluster_size=node.count,
        floor=node.floor,
        target=tracked["target"],
        lineage=node.lineage,
        data=node.data,
    )


def certified_eval_valuation(N: Poly, root: ApproxRoot):
    """v(N(y)) for the roots y of the cluster, or EXACT_ZERO if N vanishes on them.

    Certified when every root z of N satisfies v(z - c) < gamma: then
    v(y - z) = v(c - z) for every y in the cluster and v(N(y)) = v(N(c)).
    Single-root clusters are refined until this holds.
    """
    if N.is_zero():
        return EXACT_ZERO
    if not N.desc.same_field(root.host):
        raise ValueError("polynomial and root live in different fields")
    if root.target is not None:
        g = gcd(N, root.target)
        if g.degree > 0:
            inside = sum(m for _, m in roots_above(g.shift(root.value), root.floor))
            if inside == root.cluster_size:
                return EXACT_ZERO
            if inside:
                raise NeedsRefinement("N vanishes on part of the cluster only")
    center, gamma, floor = root.value, root.error_valuation, root.floor
    iso = None
    while True:
        shifted = N.shift(center)
        vals = newton_polygon(shifted).root_valuations()
        if all(v < gamma for v, _ in vals):
            return shifted[0].valuation()
        if root.cluster_size != 1 or root.target is None:
            raise NeedsRefinement("cluster too coarse to certify the evaluation")
        if iso is None:
            iso = RootIsolator({"target": root.target}, lambda n: True,
                               precision_cap=root.host.precision_cap)
            node = iso.node_at(center, floor, root.lineage[:-1])
        node = iso.refine_single(node)
        center, gamma = node.center, node.gamma


def eval_valuation_bound(N: Poly, root: ApproxRoot):
    """(True, v(N(y))) when certified at the cluster, else (False, a lower bound).

    Never refines.  The bound uses v(y - z) >= min(gamma, v(c - z)); an exact
    zero on the whole cluster is reported as (True, INFINITY).
    """
    if N.is_zero():
        return True, INFINITY
    shifted = N.shift(root.value)
    gamma = root.error_valuation
    vals = newton_polygon(shifted).root_valuations()
    if all(v < gamma for v, _ in vals):
        return True, shifted[0].valuation()
    # N has zeros near the cluster; test for a common factor with the target
    if root.target is not None:
        g = gcd(N, root.target)
        if g.degree > 0:
            inside = sum(m for _, m in roots_above(g.shift(root.value), root.floor))
            if inside == root.cluster_size:
                return True, INFINITY
    return False, shifted.lc.valuation() + sum(m * min(gamma, v) for v, m in vals)


@dataclass
class DifferenceMatrix:
    """Certified v(y_a - y_b) between clusters; diagonal holds the internal lower bound."""

    entries: list

    def __getitem__(self, ij):
        i, j = ij
        return self.entries[i][j]

    def __len__(self):
        return len(self.entries)

    def is_ultrametric(self) -> bool:
        n = len(self.entries)
        d = self.entries
        for i in range(n):
            for j in range(n):
                for k in range(n):
                    if len({i, j, k}) == 3 and d[i][k] < min(d[i][j], d[j][k]):
                        return False
        return True

    def to_json(self):
        return [[_ser(x) for x in row] for row in self.entries]


def tree_distance(a: ApproxRoot, b: ApproxRoot):
    """gamma of the last common refinement node of two clusters."""
    common = None
    for x, y in zip(a.lineage, b.lineage):
        if x[0] != y[0]:
            break
        common = x[1]
    if common is None:
        raise ValueError("clusters come from different refinement runs")
    return common


def difference_matrix(roots) -> DifferenceMatrix:
    """Pairwise distances, cross-checked against v(c_a - c_b) of the centers."""
    n = len(roots)
    entries = [[INFINITY] * n for _ in range(n)]
    for i in range(n):
        a = roots[i]
        entries[i][i] = a.error_valuation if a.cluster_size > 1 else INFINITY
        for j in range(i + 1, n):
            b = roots[j]
            if a.lineage and b.lineage:
                d = tree_distance(a, b)
                if d >= min(a.error_valuation, b.error_valuation):
                    raise PrecisionCapExceeded("clusters overlap; distance not certified")
                direct = (a.value - b.value).valuation()
                if direct != d:
                    raise PrecisionCapExceeded(f"center distance {direct} disagrees with tree distance {d}")
            else:
                d = (a.value - b.value).valuation()
                if d >= min(a.error_valuation, b.error_valuation):
                    raise PrecisionCapExceeded("approximations too coarse to certify a distance")
            entries[i][j] = entries[j][i] = d
    return DifferenceMatrix(entries)


def difference_polynomial(T: Poly) -> Poly:
    """Monic polynomial whose roots are y_i - y_j (i != j) over the roots of squarefree T.

    Built from power sums: sum_{i,j} (y_i - y_j)^k expands into products of
    power sums of the roots of T, and Newton's identities turn those into
    coefficients.  Everything is exact over the field of T.
    """
    T = T.monic()
    s = T.degree
    desc = T.desc
    N = s * (s - 1)
    if N == 0:
        return Poly.one(desc, "W")
    # power sums of the roots of T
    P = [desc(s)] + [None] * N
    for a in range(1, N + 1):
        acc = desc.zero()
        for i in range(1, min(a - 1, s) + 1):
            coeff = T[s - i]
            if not coeff.is_zero():
                acc = acc + coeff * P[a - i]
        if a <= s:
            coeff = T[s - a]
            if not coeff.is_zero():
                acc = acc + coeff.scale(a)
        P[a] = -acc
    # power sums of the differences
    Q = [None] * (N + 1)
    for k in range(1, N + 1):
        acc = desc.zero()
        for a in range(0, k // 2 + 1):
            term = P[a] * P[k - a]
            c = comb(k, a) * (-1) ** (k - a)
            if 2 * a != k:
                c += comb(k, k - a) * (-1) ** a
            if c:
                acc = acc + term.scale(c)
        Q[k] = acc
    # elementary symmetric functions by Newton's identities
    E = [desc.one()] + [None] * N
    for k in range(1, N + 1):
        acc = desc.zero()
        for i in range(1, k + 1):
            if Q[i].is_zero() or E[k - i].is_zero():
                continue
            term = E[k - i] * Q[i]
            acc = acc + term if i % 2 == 1 else acc - term
        E[k] = acc.scale(Fraction(1, k))
    coeffs = [E[N - j] if (N - j) % 2 == 0 else -E[N - j] for j in range(N + 1)]
    return Poly(desc, coeffs, "W")


def distance_multiset(T: Poly) -> dict:
    """{v: number of ordered pairs (i, j), i != j, with v(y_i - y_j) = v} for squarefree T."""
    D = difference_polynomial(T)
    out = {}
    for v, m in newton_polygon(D).root_valuations():
        if v == INFINITY:
            raise ValueError("polynomial is not squarefree")
        out[v] = out.get(v, 0) + m
    return out
