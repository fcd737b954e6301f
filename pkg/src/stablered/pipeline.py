"""Job description, the end-to-end run and its report.

A job is one TOML or JSON document:

    [field]
    p = 2
    e = 1
    residue_modulus = [0, 1]

    [polynomial]
    text = "1 + X^4 + X^5"        # or coeffs = [[["1/1"]], ...]

    [options]
    precision_cap = "512/1"
    max_extension = 512
    outputs = ["report", "dot"]
    fixtures = false

Coefficients use the field-element serialization: a list over powers of u
of lists over powers of pi of rational strings.
"""

from __future__ import annotations

import json
import logging
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction

from . import __version__
from .decomp import min_reps, recursive_head, special_decomposition
from .errors import InputRejected, NotGenus2Case, ParseError, StableReductionError
from .monodromy import bound_report
from .monopoly import check_congruence, monodromy_data
from .numfield import INFINITY, FieldDescriptor, make_field
from .padicroots import EXACT_ZERO, eval_valuation_bound
from .parsing import parse_poly
from .polyalg import Poly, newton_polygon
from .reduction import (NeedsRefinement, brute_force_radius, classify_genus2, embed_poly,
                        genus_sum_check, reduction_setup, stable_reduction, validate_input)

log = logging.getLogger(__name__)

SCHEMA_VERSION = 1
OUTPUT_KINDS = ("report", "dot")

EXIT_OK = 0
EXIT_REJECTED = 1
EXIT_INTERNAL = 2


def _q(x):
    if x is None:
        return None
    if x is EXACT_ZERO:
        return "ExactZero"
    if x == INFINITY:
        return "inf"
    x = Fraction(x)
    return f"{x.numerator}/{x.denominator}"


# ---------------------------------------------------------------------------
# job


@dataclass
class JobSpec:
    p: int
    e: int = 1
    residue_modulus: tuple = (0, 1)
    coeffs: list | None = None  # field-element serializations, ascending
    text: str | None = None
    precision_cap: Fraction | None = None
    max_extension: int | None = None
    report_path: str | None = None
    dot_path: str | None = None
    outputs: tuple = ("report",)
    fixtures: bool = False

    def __post_init__(self):
        self.p = int(self.p)
        self.e = int(self.e)
        self.residue_modulus = tuple(int(c) for c in self.residue_modulus)
        if self.coeffs is None and self.text is None:
            raise ParseError("job has neither polynomial text nor coefficients", 0)
        if self.precision_cap is not None:
            self.precision_cap = Fraction(self.precision_cap)
        if self.max_extension is not None:
            self.max_extension = int(self.max_extension)
        self.outputs = tuple(self.outputs)
        unknown = [o for o in self.outputs if o not in OUTPUT_KINDS]
        if unknown:
            raise ParseError(f"unknown output kind {unknown[0]!r}", 0)
        self.fixtures = bool(self.fixtures)

    def field(self) -> FieldDescriptor:
        return make_field(self.p, self.e, list(self.residue_modulus), precision_cap=self.precision_cap)

    def polynomial(self, desc: FieldDescriptor | None = None) -> Poly:
        desc = desc or self.field()
        if self.coeffs is not None:
            f = Poly.from_json(desc, self.coeffs, "X")
            if self.text is not None and parse_poly(self.text, desc) != f:
                raise ParseError("polynomial text and coefficient list disagree", 0)
            return f
        return parse_poly(self.text, desc)

    def to_dict(self) -> dict:
        poly = {}
        if self.text is not None:
            poly["text"] = self.text
        if self.coeffs is not None:
            poly["coeffs"] = self.coeffs
        opts = {"outputs": list(self.outputs), "fixtures": self.fixtures}
        if self.precision_cap is not None:
            opts["precision_cap"] = _q(self.precision_cap)
        if self.max_extension is not None:
            opts["max_extension"] = self.max_extension
        if self.report_path is not None:
            opts["report"] = self.report_path
        if self.dot_path is not None:
            opts["dot"] = self.dot_path
        return {"field": {"p": self.p, "e": self.e, "residue_modulus": list(self.residue_modulus)},
                "polynomial": poly, "options": opts}

    @classmethod
    def from_dict(cls, data: dict) -> "JobSpec":
        try:
            fld = data["field"]
            poly = data["polynomial"]
        except (KeyError, TypeError) as exc:
            raise ParseError(f"missing section {exc}", 0) from None
        opts = data.get("options", {})
        mod = fld.get("residue_modulus", [0, 1])
        if isinstance(mod, str):
            from .parsing import parse_int_poly
            mod = parse_int_poly(mod, "u")
        coeffs = poly.get("coeffs")
        if coeffs is not None:
            try:
                coeffs = [[[_q(Fraction(str(c))) for c in row] for row in elt] for elt in coeffs]
            except (TypeError, ValueError, ZeroDivisionError) as exc:
                raise ParseError(f"bad coefficient: {exc}", 0) from None
        return cls(
            p=fld["p"], e=fld.get("e", 1), residue_modulus=mod,
            coeffs=coeffs, text=poly.get("text"),
            precision_cap=opts.get("precision_cap"), max_extension=opts.get("max_extension"),
            report_path=opts.get("report"), dot_path=opts.get("dot"),
            outputs=opts.get("outputs", ["report"]), fixtures=opts.get("fixtures", False))

    def dumps(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"

    def to_toml(self) -> str:
        d = self.to_dict()
        lines = []
        for section in ("field", "polynomial", "options"):
            lines.append(f"[{section}]")
            for key in sorted(d[section]):
                lines.append(f"{key} = {_toml_value(d[section][key])}")
            lines.append("")
        return "\n".join(lines)

    @classmethod
    def loads(cls, text: str, fmt: str = "json") -> "JobSpec":
        if fmt == "toml":
            import tomli
            try:
                data = tomli.loads(text)
            except tomli.TOMLDecodeError as exc:
                raise ParseError(f"invalid TOML: {exc}", 0) from None
        else:
            try:
                data = json.loads(text)
            except json.JSONDecodeError as exc:
                raise ParseError(f"invalid JSON: {exc.msg}", exc.pos) from None
        return cls.from_dict(data)

    @classmethod
    def load(cls, path: str) -> "JobSpec":
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
        return cls.loads(text, "toml" if path.endswith(".toml") else "json")


def _toml_value(v):
    # json string escaping is valid TOML basic-string escaping for our content
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, (int, str)):
        return json.dumps(v)
    if isinstance(v, list):
        return "[" + ", ".join(_toml_value(x) for x in v) + "]"
    raise TypeError(f"cannot write {type(v).__name__} as TOML")


# ---------------------------------------------------------------------------
# report


@dataclass
class Report:
    exit_code: int
    data: dict
    dot: str | None = None
    timing: dict = field(default_factory=dict)

    def to_dict(self, *, timing: bool = True) -> dict:
        out = dict(self.data)
        out["exit_code"] = self.exit_code
        if timing:
            out["timing"] = {k: f"{v:.3f}" for k, v in self.timing.items()}
        return out

    def dumps(self, *, timing: bool = True) -> str:
        return json.dumps(self.to_dict(timing=timing), indent=2, sort_keys=True) + "\n"

    @property
    def error(self):
        return self.data.get("error")


def worker_count() -> int:
    raw = os.environ.get("STABLERED_THREADS", "1")
    try:
        n = int(raw)
    except ValueError:
        raise ParseError(f"STABLERED_THREADS must be an integer, got {raw!r}", 0) from None
    return max(1, n)


class _Stages:
    def __init__(self):
        self.current = "parse"
        self.timing = {}
        self._t = None

    def enter(self, name):
        now = time.perf_counter()
        if self._t is not None:
            self.timing[self.current] = now - self._t
        self.current = name
        self._t = now
        log.info("stage %s", name)

    def close(self):
        if self._t is not None:
            self.timing[self.current] = time.perf_counter() - self._t


def run(job: JobSpec) -> Report:
    """Run the whole pipeline; failures come back as a report with exit code 1 or 2."""
    stages = _Stages()
    data = {"schema_version": SCHEMA_VERSION, "version": __version__, "input": job.to_dict()}
    start = time.perf_counter()
    dot = None
    try:
        dot = _run(job, data, stages)
        code = EXIT_OK
    except InputRejected as exc:
        code = EXIT_REJECTED
        data["error"] = _error(exc, stages.current)
    except StableReductionError as exc:
        code = EXIT_INTERNAL
        data["error"] = _error(exc, stages.current)
    except (ArithmeticError, ValueError, RecursionError) as exc:
        code = EXIT_INTERNAL
        data["error"] = _error(exc, stages.current)
    stages.close()
    stages.timing["total"] = time.perf_counter() - start
    data["status"] = "ok" if code == EXIT_OK else "failed"
    return Report(code, data, dot, stages.timing)


def _error(exc, stage):
    return {"type": type(exc).__name__, "message": str(exc), "stage": getattr(exc, "stage", None) or stage}


def _run(job: JobSpec, data: dict, stages: _Stages):
    stages.enter("parse")
    K = job.field()
    f = job.polynomial(K)
    data["field"] = K.to_json()
    data["f"] = {"text": str(f), "coeffs": f.to_json()}

    stages.enter("validate")
    val = validate_input(f, K.p)
    data["warnings"] = list(val.warnings)

    stages.enter("decompose")
    rep = min_reps(f.degree, K.p)
    dec = special_decomposition(f, rep)
    data.update({"n": rep.n, "m": val.m, "r": rep.r, "alpha": rep.alpha,
                 "genus": _q(val.genus), "multiplicities": val.multiplicities})
    checks = {"identity": dec.identity_holds(),
              "head_routes_agree": recursive_head(f, rep) == dec.head_num}
    data["checks"] = checks

    stages.enter("monodromy_polynomial")
    md = monodromy_data(f, dec)
    L = md.L
    np_ = newton_polygon(L)
    checks["degree"] = L.degree == md.expected_degree
    checks["congruence"] = check_congruence(md)
    data["L"] = {"coeffs": L.to_json(), "text": str(L), "degree": L.degree,
                 "newton_polygon": np_.to_json()}

    stages.enter("roots")
    setup = reduction_setup(dec, md)
    res = stable_reduction(setup, val.genus, max_extension=job.max_extension,
                           precision_cap=job.precision_cap)
    an = res.analysis
    data["roots"] = {
        "host": an.host.to_json(),
        "clusters": [_cluster_json(r) for r in an.roots],
        "difference_matrix": an.diff.to_json(),
    }
    checks["newton_polygon_matches_roots"] = _np_matches(np_, an.roots)
    checks["ultrametric"] = an.diff.is_ultrametric() and res.class_distances.is_ultrametric()
    checks["tail_vanishes_at_roots"] = _tail_vanishes(dec, an.roots)

    stages.enter("reduction")
    data["classes"] = [_class_json(i, cd) for i, cd in enumerate(res.class_data)]
    data["class_distances"] = res.class_distances.to_json()
    data["certified_by"] = res.certified_by
    data["components"] = [cd.component.to_json() for cd in res.class_data]
    checks["verify_reduction"] = [cd.verified for cd in res.class_data]
    checks["genus_sum"] = genus_sum_check(res.tree, val.m, K.p)

    stages.enter("tree")
    data["tree"] = res.tree.to_json()
    dot = res.tree.to_dot()
    try:
        data["reduction_type"] = classify_genus2(res.tree, K.p, val.m)
    except NotGenus2Case:
        data["reduction_type"] = None

    stages.enter("bound")
    radii = [cd.component.radius_valuation for cd in res.class_data]
    data["monodromy_bound"] = bound_report(md, an.roots, res.class_data, radii).to_json()

    if job.fixtures:
        stages.enter("oracle")
        checks["brute_force_radius"] = _oracle(f, K.p, res)
    return dot


def _cluster_json(r):
    out = r.to_json()
    out["radius_valuation"] = _q(r.data["rho"])
    out["provisional"] = bool(r.data.get("provisional"))
    return out


def _class_json(i, cd):
    return {"index": i, "clusters": list(cd.members), "size": cd.size,
            "part": list(cd.part), "provisional": cd.provisional,
            "center": cd.component.center.to_json(),
            "radius_valuation": _q(cd.component.radius_valuation)}


def _np_matches(np_, roots) -> bool:
    expected = {}
    for v, mult in np_.root_valuations():
        expected[v] = expected.get(v, 0) + mult
    got = {}
    for r in roots:
        got[r.slope] = got.get(r.slope, 0) + r.cluster_size * r.multiplicity
    return expected == got


def _tail_vanishes(dec, roots) -> bool:
    """A_{p^alpha} is ExactZero at every zero of L, checked through the numerator."""
    num = dec.tail_num[dec.rep.p_alpha]
    for r in roots:
        ok, v = eval_valuation_bound(embed_poly(num, r.host), r)
        if not ok or v != INFINITY:
            return False
    return True


def _oracle(f, p, res):
    an = res.analysis
    jobs = [an.roots[cd.members[0]] for cd in res.class_data]

    def one(root):
        try:
            return brute_force_radius(f, root, p)
        except NeedsRefinement:
            return None

    with ThreadPoolExecutor(max_workers=worker_count()) as pool:
        hits = list(pool.map(one, jobs))
    out = []
    for cd, h in zip(res.class_data, hits):
        rho = cd.component.radius_valuation
        out.append({"radius_valuation": _q(rho), "hits": None if h is None else [_q(t) for t in h],
                    "agrees": h is not None and h == [rho]})
    return out
