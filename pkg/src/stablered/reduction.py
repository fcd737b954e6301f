"""Radii, Artin-Schreier reductions, the reduction tree and its checks.

For a zero y of the monodromy polynomial, the component attached to y has
radius rho with

    v(rho) = max_i (v(lambda^p) - v(A_i(y))) / i      (i in M0, A_i(y) != 0),

and the indices attaining the maximum give the reduced Artin-Schreier
equation Z^p - Z = sum c_i x^i over the residue field.  Zeros of L are found
as clusters (see :mod:`stablered.padicroots`); the stop rule below refines a
cluster until every quantity above is certified for all of its roots at
once and the cluster fits inside one disc of radius rho.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from fractions import Fraction
from math import comb, lcm

from .decomp import SpecialDecomposition
from .errors import (
    EmptyTail,
    InconsistentRadiiInClass,
    InternalInvariantViolation,
    MultiplicityDivisibleByP,
    NonIntegral,
    NonUnitS0AtCenter,
    PrecisionCapExceeded,
    NotEquidistant,
    NotGenus2Case,
    PreconditionViolation,
    UnrecognizedShape,
    DegreeDivisibleByP,
)
from .monopoly import MonodromyData
from .numfield import INFINITY, FieldDescriptor, FieldElement, extend_field
from .padicroots import (
    EXACT_ZERO,
    ApproxRoot,
    ClusterNode,
    DifferenceMatrix,
    _to_approx,
    certified_eval_valuation,
    NeedsRefinement,
    difference_matrix,
    distance_multiset,
    eval_valuation_bound,
    run_with_escalation,
)
from .polyalg import Poly, RatFunc, gcd, squarefree_decomposition, squarefree_part
from .residue import poly_radical, poly_trim

log = logging.getLogger(__name__)


# ---------------------------------------------------------------------------
# input validation


@dataclass
class Validation:
    n: int
    m: int
    p: int
    genus: Fraction
    multiplicities: list
    warnings: list = field(default_factory=list)


def validate_input(f: Poly, p: int) -> Validation:
    """Reject inputs outside the equidistant, tame-multiplicity setting."""
    if f.is_zero() or not f.is_monic():
        raise PreconditionViolation("f must be monic")
    if not f.is_integral():
        raise NonIntegral("f must have integral coefficients")
    n = f.degree
    if n < 1:
        raise PreconditionViolation("f must have positive degree")
    parts = squarefree_decomposition(f.with_var("Y"))
    mults = sorted(mult for _, mult in parts)
    bad = [mult for mult in mults if mult % p == 0]
    if bad:
        raise MultiplicityDivisibleByP(f"root multiplicity {bad[0]} is divisible by p={p}")
    S0 = squarefree_part(f.with_var("Y"))
    m = S0.degree
    reduced = poly_trim([c.residue() for c in S0.coeffs])
    if len(reduced) - 1 != m or len(poly_radical(reduced)) - 1 != m:
        raise NotEquidistant("the distinct zeros of f do not have distinct reductions")
    if n % p == 0:
        raise DegreeDivisibleByP(f"degree {n} is divisible by p={p}")
    out = Validation(n, m, p, Fraction((p - 1) * (m - 1), 2), mults)
    if m * (p - 1) < n:
        out.warnings.append(f"m(p-1) = {m * (p - 1)} < n = {n}")
    return out


# ---------------------------------------------------------------------------
# radius


def radius_valuation(tail_vals: dict, lambda_p_val) -> Fraction:
    """max over finite entries of (v(lambda^p) - v(A_i(y))) / i."""
    cands = [(Fraction(lambda_p_val) - v) / i for i, v in tail_vals.items()
             if v is not EXACT_ZERO and v != INFINITY]
    if not cands:
        raise EmptyTail("no finite tail valuation")
    return max(cands)


# ---------------------------------------------------------------------------
# the cluster stop rule


def _strip_s0_factors(N: Poly, s0: Poly) -> Poly:
    """Remove from N every factor supported on zeros of s0 (those are units at centers)."""
    while N.degree > 0:
        g = gcd(N, s0)
        if g.degree <= 0:
            break
        N = N.exact_div(g)
    return N.monic()


@dataclass
class ReductionSetup:
    """Polynomials over the base field that drive the root isolation."""

    dec: SpecialDecomposition
    md: MonodromyData
    polys: dict
    tail_indices: list
    zero_pieces: dict

    @property
    def rep(self):
        return self.dec.rep


def reduction_setup(dec: SpecialDecomposition, md: MonodromyData) -> ReductionSetup:
    rep = dec.rep
    s0 = dec.s0
    L = md.L
    Lsf = squarefree_part(L)
    if gcd(Lsf, s0).degree > 0:
        raise NonUnitS0AtCenter("the monodromy polynomial shares a zero with f")
    polys = {"target": Lsf, "s0": s0}
    for piece, mult in squarefree_decomposition(L):
        polys[f"mult:{mult}"] = piece
    tail_indices = [i for i in rep.M0 if i != rep.p_alpha]
    zero_pieces = {}
    for i in tail_indices:
        if i == rep.n or dec.c[i].is_zero():
            continue
        core = _strip_s0_factors(dec.N[i], s0)
        if core.degree > 0:
            polys[f"core:{i}"] = core
            z = gcd(Lsf, core)
            if z.degree > 0:
                polys[f"zero:{i}"] = z
                zero_pieces[i] = z
    return ReductionSetup(dec, md, polys, tail_indices, zero_pieces)


def _certified(node: ClusterNode, name: str):
    """(True, v(P(c))) if every zero z of P has v(z - c) < gamma, else (False, lower bound)."""
    roots = node.all_roots(name)
    P = node.shifted[name]
    if all(v < node.gamma for v, _ in roots):
        return True, P[0].valuation()
    lower = P.lc.valuation() + sum(m * min(node.gamma, v) for v, m in roots)
    return False, lower


def cluster_tail_data(setup: ReductionSetup, node: ClusterNode, strict: bool = True):
    """Certified tail valuations and radius at a cluster, or None if refinement is needed.

    In strict mode the cluster must also fit in one disc of the radius
    (gamma >= v(rho)).  Otherwise such a cluster is accepted as provisional:
    its roots share all tail valuations, and how they fall into discs of the
    radius is settled later from the exact pairwise distances.
    """
    if not node.is_exact and not node.center.valuation() < node.gamma:
        return None
    for name in node.shifted:
        if name.startswith(("zero:", "mult:")):
            inside = node.count_in_cluster(name)
            if 0 < inside < node.count:
                return None
    ok, v_s0 = _certified(node, "s0")
    if not ok:
        return None
    if v_s0 != 0:
        raise NonUnitS0AtCenter(f"v(s_0) = {v_s0} at a zero of the monodromy polynomial")
    dec = setup.dec
    lam = node.center.desc.lambda_p_valuation
    vals, lower = {}, {}
    for i in setup.tail_indices:
        c = dec.c[i]
        if c.is_zero():
            vals[i] = EXACT_ZERO
        elif i == setup.rep.n:
            vals[i] = c.valuation()
        elif f"zero:{i}" in node.shifted and node.count_in_cluster(f"zero:{i}") == node.count:
            vals[i] = EXACT_ZERO
        elif f"core:{i}" not in node.shifted:
            vals[i] = c.valuation()
        else:
            ok, v = _certified(node, f"core:{i}")
            if ok:
                vals[i] = c.valuation() + v
            else:
                lower[i] = c.valuation() + v
    rho = radius_valuation(vals, lam)
    for i, lb in lower.items():
        if (lam - lb) / i >= rho:
            return None
    provisional = node.gamma < rho
    if provisional and (strict or node.count == 1):
        return None
    return {"rho": rho, "tail_vals": vals, "provisional": provisional}


def make_stop(setup: ReductionSetup, strict: bool = True):
    def factory(host, emb, tracked):
        def stop(node: ClusterNode) -> bool:
            data = cluster_tail_data(setup, node, strict)
            if data is None:
                return False
            node.data.update(data)
            return True
        return stop
    return factory


@dataclass
class RootAnalysis:
    host: FieldDescriptor
    embedding: object
    roots: list
    diff: DifferenceMatrix
    tracked: dict
    strict: bool = True


def analyze_roots(setup: ReductionSetup, *, strict=True, max_extension=None,
                  precision_cap=None) -> RootAnalysis:
    base = setup.dec.desc
    host, emb, tracked, final, _ = run_with_escalation(
        base, setup.polys, make_stop(setup, strict), max_extension=max_extension,
        precision_cap=precision_cap if precision_cap is not None else base.precision_cap)
    roots = [_to_approx(node, host, tracked) for node in final]
    for r in roots:
        if r.data["rho"] <= 0:
            raise InternalInvariantViolation(f"non-positive radius valuation {r.data['rho']}")
    return RootAnalysis(host, emb, roots, difference_matrix(roots), tracked, strict)


# ---------------------------------------------------------------------------
# reduced equations


def embed_poly(poly: Poly, host: FieldDescriptor) -> Poly:
    if poly.desc.same_field(host):
        return poly
    _, emb = extend_field(poly.desc, host.e, host.residue_modulus)
    return poly.map_coeffs(emb, host)


def evaluation_field(host: FieldDescriptor, rho_val) -> tuple:
    """Extension in which rho = pi^(e rho_val) and pi^(e p/(p-1)) exist."""
    rho_val = Fraction(rho_val)
    e = lcm(host.e, rho_val.denominator, Fraction(host.p, host.p - 1).denominator)
    return extend_field(host, e, host.residue_modulus)


def lambda_p_standin(desc: FieldDescriptor) -> FieldElement:
    """lambda^p exactly for p = 2 (lambda = -2), else pi^(e p/(p-1)) (same valuation)."""
    if desc.p == 2:
        return desc(4)
    return desc.pi_power(int(desc.e * Fraction(desc.p, desc.p - 1)))


def artin_schreier_normalize(terms: dict, p: int) -> dict:
    """Replace c x^i with p | i by c^(1/p) x^(i/p) until no such term remains."""
    out = {i: c for i, c in terms.items() if not c.is_zero()}
    while True:
        wild = sorted((i for i in out if i % p == 0), reverse=True)
        if not wild:
            return dict(sorted(out.items()))
        i = wild[0]
        c = out.pop(i)
        root = c.frobenius_inverse()
        j = i // p
        out[j] = out[j] + root if j in out else root
        if out[j].is_zero():
            del out[j]


@dataclass
class ComponentData:
    center: ApproxRoot
    radius_valuation: Fraction
    surviving: list
    raw_rhs: dict
    as_rhs: dict
    conductor_d: int
    genus: Fraction
    s0_at_center_valuation: Fraction
    tail_valuations: dict = field(default_factory=dict)

    def to_json(self):
        return {
            "radius_valuation": _q(self.radius_valuation),
            "surviving": [[i, c.to_list()] for i, c in self.surviving],
            "as_rhs": [[i, c.to_list()] for i, c in self.as_rhs.items()],
            "conductor": self.conductor_d,
            "genus": _q(self.genus),
            "s0_at_center_valuation": _q(self.s0_at_center_valuation),
            "tail_valuations": {str(i): ("ExactZero" if v is EXACT_ZERO else _q(v))
                                for i, v in self.tail_valuations.items()},
        }


def _q(x):
    if x is None:
        return None
    if x == INFINITY:
        return "inf"
    x = Fraction(x)
    return f"{x.numerator}/{x.denominator}"


def conductor_and_genus(normalized: dict, p: int):
    """Degree d of a normalized right side and the genus (p-1)(d-1)/2; d must be >= 2 and prime to p."""
    if not normalized:
        raise InternalInvariantViolation("reduced equation is trivial")
    d = max(normalized)
    if d < 2 or d % p == 0:
        raise InternalInvariantViolation(f"conductor exponent {d} is not a valid Artin-Schreier degree")
    return d, Fraction((p - 1) * (d - 1), 2)


def cluster_tail_valuations(dec: SpecialDecomposition, root: ApproxRoot) -> dict:
    """v(A_i(y)) for i in M0 minus p^alpha, certified at the cluster (refining single roots)."""
    rep = dec.rep
    out = {}
    for i in rep.M0:
        if i == rep.p_alpha:
            continue
        if dec.c[i].is_zero():
            out[i] = EXACT_ZERO
            continue
        core = _strip_s0_factors(dec.N[i], dec.s0)
        val = certified_eval_valuation(embed_poly(core, root.host), root)
        out[i] = val if val is EXACT_ZERO else dec.c[i].valuation() + val
    return out


def reduced_equation(dec: SpecialDecomposition, root: ApproxRoot, rho_val, *, tail_vals=None) -> ComponentData:
    """Surviving monomials, their residues and the normalized Artin-Schreier right side."""
    p = dec.rep.p
    host = root.host
    rho_val = Fraction(rho_val)
    if tail_vals is None:
        tail_vals = root.data.get("tail_vals") or cluster_tail_valuations(dec, root)
    lam = host.lambda_p_valuation
    surviving_idx = [i for i, v in sorted(tail_vals.items())
                     if v is not EXACT_ZERO and v + i * rho_val == lam]
    if not surviving_idx:
        raise InternalInvariantViolation("no surviving monomial at the radius")
    if any(v is not EXACT_ZERO and v + i * rho_val < lam for i, v in tail_vals.items()):
        raise InternalInvariantViolation("tail term below v(lambda^p) at the radius")
    E, emb = evaluation_field(host, rho_val)
    c = emb(root.value)
    s0c = embed_poly(dec.s0, E)(c)
    s0_val = s0c.valuation()
    if s0_val != 0:
        raise NonUnitS0AtCenter(f"v(s_0(center)) = {s0_val}")
    rho = E.pi_power(int(rho_val * E.e))
    lam_el = lambda_p_standin(E)
    scale = (s0c.inverse() * rho)
    raw = {}
    for i in surviving_idx:
        value = embed_poly(dec.tail_num[i], E)(c) * scale ** i / lam_el
        if value.valuation() != 0:
            raise InternalInvariantViolation(f"surviving coefficient {i} is not a unit")
        raw[i] = value.residue()
    F = E.residue_field
    raw = {i: F(list(r.coeffs)) for i, r in raw.items()}
    normalized = artin_schreier_normalize(raw, p)
    d, genus = conductor_and_genus(normalized, p)
    return ComponentData(
        center=root,
        radius_valuation=rho_val,
        surviving=[(i, raw[i]) for i in surviving_idx],
        raw_rhs=raw,
        as_rhs=normalized,
        conductor_d=d,
        genus=genus,
        s0_at_center_valuation=s0_val,
        tail_valuations=tail_vals,
    )


def _root_valuation(N: Poly, root: ApproxRoot):
    """(certified, v(N(y))) for the exact roots y of the cluster; single roots are refined."""
    N = embed_poly(N, root.host)
    if root.cluster_size == 1 and not root.is_exact:
        try:
            val = certified_eval_valuation(N, root)
            return True, INFINITY if val is EXACT_ZERO else val
        except NeedsRefinement:
            pass
    return eval_valuation_bound(N, root)


def verify_reduction(dec: SpecialDecomposition, root: ApproxRoot, rho: FieldElement) -> bool:
    """Degeneration criterion at the exact roots y of the cluster for the radius rho.

    True iff every head coefficient a_i(y) rho^i is integral and the minimum of
    v(A_i(y) rho^i) over all tail indices equals v(lambda^p).  Valuations at y
    are certified from the cluster (the coefficients of f(rho X + y)/s_0(y) -
    H(rho X, y)^p are exactly -A_i(y) rho^i).
    """
    vr = rho.valuation()
    ok, v_s0 = _root_valuation(dec.s0, root)
    if not ok or v_s0 == INFINITY:
        raise NeedsRefinement("s_0 is not certified on the cluster")
    for i in range(1, dec.rep.r + 1):
        ok, v = _root_valuation(dec.head_num[i], root)
        bound = v - i * v_s0 + i * vr
        if bound < 0:
            if ok:
                return False
            raise NeedsRefinement(f"head coefficient {i} not certified")
    best = INFINITY
    uncertain = INFINITY
    for i in dec.rep.M0:
        if dec.c[i].is_zero():
            continue
        ok, v = _root_valuation(dec.tail_num[i], root)
        term = v - i * v_s0 + i * vr
        if ok:
            best = min(best, term)
        else:
            uncertain = min(uncertain, term)
    lam = root.host.lambda_p_valuation
    if uncertain <= min(best, lam):
        raise NeedsRefinement("tail valuations not certified near v(lambda^p)")
    return best == lam


def brute_force_radius(f: Poly, root: ApproxRoot, p: int, *, max_den: int = 12, upper=None):
    """Grid search for v(rho) satisfying the degeneration criterion directly.

    Builds F(X) = f(X + Y)/f(Y) by binomial expansion, its truncated p-th root
    H one coefficient at a time and the difference F - H^p, all as rational
    functions of Y; their valuations at the cluster's roots are certified and
    every grid value t = a/b (b <= max_den) is tested for H(rho X) integral
    and min_i v([F - H^p]_i rho^i) = v(lambda^p).  No tail normalization and
    no closed-form maximum is used.  Returns the sorted list of hits.
    """
    desc = f.desc
    n = f.degree
    r = (n - 1) // p
    fY = f.with_var("Y")
    F = []
    for i in range(n + 1):
        coeffs = [desc.zero()] * (n - i + 1)
        for j in range(i, n + 1):
            coeffs[j - i] = f[j].scale(comb(j, i))
        F.append(RatFunc(Poly(desc, coeffs, "Y"), fY))
    one = RatFunc(Poly.one(desc, "Y"))
    zero = RatFunc(Poly.zero(desc, "Y"))

    def series_pow(a, k, top):
        out = [one] + [zero] * top
        for _ in range(k):
            nxt = [zero] * (top + 1)
            for i, x in enumerate(out):
                if x.num.is_zero():
                    continue
                for j, y in enumerate(a[: top + 1 - i]):
                    if not y.num.is_zero():
                        nxt[i + j] = nxt[i + j] + x * y
            out = nxt
        return out

    H = [one]
    for l in range(r):
        known = series_pow(H + [zero], p, l + 1)[l + 1]
        H.append((F[l + 1] - known) * Fraction(1, p))
    Hp = series_pow(H + [zero] * (n - r), p, n)
    D = [F[i] - Hp[i] for i in range(n + 1)]

    def val(q):
        if q.num.is_zero():
            return True, INFINITY
        ok1, a = _root_valuation(q.num, root)
        ok2, b = _root_valuation(q.den, root)
        if not ok2:
            raise NeedsRefinement("denominator not certified")
        return ok1, a - b

    vH = [val(h) for h in H[1:]]
    vD = [val(d) for d in D]
    lam = root.host.lambda_p_valuation
    upper = Fraction(upper) if upper is not None else lam + 2
    hits = []
    for den in range(1, max_den + 1):
        num = 1
        while Fraction(num, den) <= upper:
            t = Fraction(num, den)
            num += 1
            if t.denominator != den:
                continue
            if any(v + (i + 1) * t < 0 for i, (_, v) in enumerate(vH)):
                continue
            certain = min((v + i * t for i, (ok, v) in enumerate(vD) if ok), default=INFINITY)
            unsure = min((v + i * t for i, (ok, v) in enumerate(vD) if not ok), default=INFINITY)
            if unsure <= min(certain, lam):
                raise NeedsRefinement(f"difference coefficients not certified at t = {t}")
            if certain == lam:
                hits.append(t)
    return sorted(hits)


# ---------------------------------------------------------------------------
# classes and tree


def dedupe_centers(roots, radii, diff: DifferenceMatrix):
    """Classes of (y, rho) with equal radii and mutual distance >= rho."""
    n = len(roots)
    parent = list(range(n))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for i in range(n):
        for j in range(i + 1, n):
            d = diff[i, j]
            close_i = d >= radii[i]
            close_j = d >= radii[j]
            if close_i or close_j:
                if radii[i] != radii[j]:
                    raise InconsistentRadiiInClass(
                        f"roots {i} and {j} are within radius but have radii {radii[i]} and {radii[j]}")
                parent[find(i)] = find(j)
    groups = {}
    for i in range(n):
        groups.setdefault(find(i), []).append(i)
    return sorted(groups.values())


@dataclass
class TreeNode:
    kind: str  # "original", "intermediate" or "end"
    depth: Fraction
    children: list = field(default_factory=list)
    component: ComponentData | None = None
    class_index: int | None = None

    @property
    def genus(self):
        return self.component.genus if self.component is not None else Fraction(0)

    def to_json(self):
        out = {"kind": self.kind, "depth": _q(self.depth), "genus": _q(self.genus)}
        if self.class_index is not None:
            out["class"] = self.class_index
        if self.component is not None:
            out["component"] = self.component.to_json()
        out["children"] = [c.to_json() for c in self.children]
        return out


@dataclass
class ReductionTree:
    root: TreeNode

    def nodes(self):
        stack = [self.root]
        while stack:
            node = stack.pop()
            yield node
            stack.extend(reversed(node.children))

    def leaves(self):
        return [n for n in self.nodes() if n.kind == "end"]

    def to_json(self):
        return self.root.to_json()

    def to_dot(self) -> str:
        lines = ["graph reduction {"]
        ids = {}
        for idx, node in enumerate(self.nodes()):
            ids[id(node)] = f"n{idx}"
            label = f"g={_genus_str(node.genus)} d={_q(node.depth)}"
            if node.kind == "original":
                label += " original"
            elif node.component is not None:
                label += f" center v={_q(node.component.center.slope)}"
            lines.append(f'  n{idx} [label="{label}"];')
        for node in self.nodes():
            for child in node.children:
                lines.append(f"  {ids[id(node)]} -- {ids[id(child)]};")
        lines.append("}")
        return "\n".join(lines) + "\n"


def _genus_str(g):
    g = Fraction(g)
    return str(g.numerator) if g.denominator == 1 else f"{g.numerator}/{g.denominator}"


def build_tree(classes, diff: DifferenceMatrix, components=None) -> ReductionTree:
    """Cluster tree over class representatives; root is the original component at depth 0."""
    reps = [cls[0] for cls in classes]
    components = components or [None] * len(classes)

    def dist(a, b):
        return diff[reps[a], reps[b]]

    def build(members, level):
        blocks = []
        for a in members:
            for block in blocks:
                if dist(a, block[0]) > level:
                    block.append(a)
                    break
            else:
                blocks.append([a])
        out = []
        for block in blocks:
            if len(block) == 1:
                a = block[0]
                comp = components[a]
                depth = comp.radius_valuation if comp is not None else INFINITY
                out.append(TreeNode("end", depth, component=comp, class_index=a))
            else:
                inner = min(dist(a, b) for a in block for b in block if a != b)
                out.append(TreeNode("intermediate", inner, build(block, inner)))
        return out

    root = TreeNode("original", Fraction(0), build(list(range(len(classes))), Fraction(0)))
    return ReductionTree(root)


def classify_genus2(tree: ReductionTree, p: int = 2, m: int = 5) -> int:
    if p != 2 or m != 5:
        raise NotGenus2Case(f"genus-2 classification needs p = 2 and m = 5, got p={p}, m={m}")
    leaves = tree.leaves()
    genera = sorted(leaf.genus for leaf in leaves)
    if genera == [2]:
        return 3
    if genera == [1, 1]:
        if all(leaf in tree.root.children for leaf in leaves):
            return 1
        mids = [c for c in tree.root.children if c.kind == "intermediate"]
        if len(mids) == 1 and all(leaf in mids[0].children for leaf in leaves) and len(tree.root.children) == 1:
            return 2
    raise UnrecognizedShape(f"unexpected leaf genera {genera}")


def genus_sum_check(tree: ReductionTree, m: int, p: int) -> bool:
    return sum(leaf.genus for leaf in tree.leaves()) == Fraction((p - 1) * (m - 1), 2)


# ---------------------------------------------------------------------------
# per-class assembly


DISTANCE_DEGREE_LIMIT = 24


@dataclass
class ClassData:
    members: list  # indices into the list of final clusters
    component: ComponentData
    size: int | None
    verified: object  # True, False, or None when not certifiable
    provisional: bool = False
    part: tuple = (0, 1)  # (index, count) when a provisional cluster holds several classes


def reduce_classes(dec: SpecialDecomposition, analysis: RootAnalysis):
    roots = analysis.roots
    radii = [r.data["rho"] for r in roots]
    classes = dedupe_centers(roots, radii, analysis.diff)
    out = []
    for members in classes:
        rep_root = roots[members[0]]
        comp = reduced_equation(dec, rep_root, radii[members[0]])
        E, _ = evaluation_field(rep_root.host, comp.radius_valuation)
        rho = E.pi_power(int(comp.radius_valuation * E.e))
        try:
            ok = verify_reduction(dec, rep_root, rho)
        except NeedsRefinement:
            ok = None
        size = sum(roots[i].cluster_size for i in members)
        provisional = any(roots[i].data.get("provisional") for i in members)
        out.append(ClassData(members, comp, size, ok, provisional))
    return classes, out


def internal_distances(analysis: RootAnalysis, T: Poly) -> dict:
    """Ordered-pair distances inside the final clusters.

    All pairwise distances of the roots of T, minus the pairs in different
    clusters, whose distances are known from the refinement tree.
    """
    left = distance_multiset(T)
    roots = analysis.roots
    for a in range(len(roots)):
        for b in range(len(roots)):
            if a != b:
                d = analysis.diff[a, b]
                left[d] = left.get(d, 0) - roots[a].cluster_size * roots[b].cluster_size
    if any(c < 0 for c in left.values()):
        raise InternalInvariantViolation("cluster distances exceed the exact distance multiset")
    return {v: c for v, c in left.items() if c}


def _split_sizes(s: int, count: int, t: int):
    """Sizes of t classes of a cluster of s roots meeting at one level with count cross pairs."""
    if t == 1:
        return [s] if count == 0 else None
    if t == 2:
        for a in range(1, s // 2 + 1):
            if 2 * a * (s - a) == count:
                return [a, s - a]
        return None
    if s % t == 0 and s * s - t * (s // t) ** 2 == count:
        return [s // t] * t
    return None


@dataclass
class Resolution:
    classes: list
    distances: DifferenceMatrix
    certified_by: str


def resolve_provisional(setup: ReductionSetup, analysis: RootAnalysis, data: list, genus) -> Resolution:
    """Split provisional clusters into classes and return the class distance matrix.

    A provisional cluster with no pairwise distance below its radius is one
    class.  Otherwise its roots fall into several discs meeting at a level d;
    only the single-level pattern is resolved, with the number of classes
    fixed by the genus count.  When T is too large for the exact distance
    multiset, every provisional cluster is taken as one class and the genus
    count alone certifies it (a split would add another positive-genus end).
    """
    genus = Fraction(genus)
    roots = analysis.roots
    if not any(d.provisional for d in data):
        return Resolution(data, _class_matrix(analysis, data, {}), "refinement")
    T = setup.polys["target"]
    if T.degree > DISTANCE_DEGREE_LIMIT:
        return Resolution(data, _class_matrix(analysis, data, {}), "genus count")
    internal = internal_distances(analysis, T)
    splits = {}
    for idx, cd in enumerate(data):
        if not cd.provisional:
            continue
        (r,) = cd.members
        rho = cd.component.radius_valuation
        gamma = roots[r].error_valuation
        crowd = [j for j, other in enumerate(roots)
                 if j != r and other.cluster_size > 1 and other.error_valuation < rho]
        below = {v: c for v, c in internal.items() if v < rho}
        if crowd:
            # a pair inside this cluster sits at distance >= gamma; drop levels it cannot own
            below = {v: c for v, c in below.items() if v >= gamma}
            if any(roots[j].error_valuation <= v for j in crowd for v in below):
                raise PrecisionCapExceeded("provisional clusters overlap below their radius")
        if not below:
            continue
        if min(below) < gamma:
            raise InternalInvariantViolation("internal distance below the cluster level")
        if len(below) != 1:
            raise UnrecognizedShape(f"provisional cluster splits over several levels {sorted(below)}")
        splits[idx] = next(iter(below.items()))
    if len(splits) > 1:
        raise PrecisionCapExceeded("several provisional clusters split; class counts are not determined")
    out, meet = [], {}
    settled = sum((d.component.genus for i, d in enumerate(data) if i not in splits), Fraction(0))
    for idx, cd in enumerate(data):
        if idx not in splits:
            out.append(cd)
            continue
        level, count = splits[idx]
        t = (genus - settled) / cd.component.genus
        if t.denominator != 1 or t < 2:
            raise InternalInvariantViolation(f"split cluster would need {t} classes")
        t = int(t)
        sizes = _split_sizes(cd.size, count, t) or [None] * t
        group = []
        for k in range(t):
            out.append(ClassData(cd.members, cd.component, sizes[k], cd.verified, True, (k, t)))
            group.append(len(out) - 1)
        for a in group:
            for b in group:
                if a != b:
                    meet[a, b] = level
    return Resolution(out, _class_matrix(analysis, out, meet), "distance multiset")


def _class_matrix(analysis: RootAnalysis, classes: list, meet: dict) -> DifferenceMatrix:
    n = len(classes)
    entries = [[INFINITY] * n for _ in range(n)]
    for a in range(n):
        for b in range(n):
            if a == b:
                continue
            if (a, b) in meet:
                entries[a][b] = meet[a, b]
            else:
                entries[a][b] = max(analysis.diff[i, j] for i in classes[a].members for j in classes[b].members)
    return DifferenceMatrix(entries)


@dataclass
class ReductionResult:
    analysis: RootAnalysis
    root_classes: list
    class_data: list
    class_distances: DifferenceMatrix
    tree: ReductionTree
    genus_total: Fraction
    certified_by: str


def stable_reduction(setup: ReductionSetup, genus, *, max_extension=None, precision_cap=None) -> ReductionResult:
    """Isolate the zeros of L, reduce each class and assemble the tree."""
    analysis = analyze_roots(setup, strict=False, max_extension=max_extension, precision_cap=precision_cap)
    classes, data = reduce_classes(setup.dec, analysis)
    res = resolve_provisional(setup, analysis, data, genus)
    tree = build_tree([[i] for i in range(len(res.classes))], res.distances,
                      [d.component for d in res.classes])
    total = sum((leaf.genus for leaf in tree.leaves()), Fraction(0))
    if total != Fraction(genus):
        raise InternalInvariantViolation(f"ends carry genus {total}, expected {genus}")
    return ReductionResult(analysis, classes, res.classes, res.distances, tree, total, res.certified_by)
