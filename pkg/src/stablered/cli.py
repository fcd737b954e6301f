"""Command line entry point: ``stablered --input job.toml --out report.json``."""

from __future__ import annotations

import argparse
import logging
import sys
from fractions import Fraction

from .errors import ParseError
from .pipeline import EXIT_REJECTED, JobSpec, run


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="stablered",
        description="Stable reduction of Z^p = f(X) over a p-adic field in the equidistant case.")
    ap.add_argument("--input", required=True, help="job file (.toml or .json)")
    ap.add_argument("--out", help="write the JSON report here (default: stdout)")
    ap.add_argument("--dot", help="write the reduction tree in DOT format here")
    ap.add_argument("--precision-cap", type=Fraction, help="largest valuation tracked, e.g. 512 or 1024/3")
    ap.add_argument("--max-extension", type=int, help="largest relative degree e*k of a host over the input field")
    ap.add_argument("--no-timing", action="store_true", help="omit wall-clock timings from the report")
    ap.add_argument("--verbose", "-v", action="store_true")
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        job = JobSpec.load(args.input)
    except (OSError, ParseError, KeyError, TypeError, ValueError) as exc:
        print(f"stablered: cannot read job {args.input}: {exc}", file=sys.stderr)
        return EXIT_REJECTED
    if args.precision_cap is not None:
        job.precision_cap = args.precision_cap
    if args.max_extension is not None:
        job.max_extension = args.max_extension
    if args.out:
        job.report_path = args.out
    if args.dot:
        job.dot_path = args.dot
        if "dot" not in job.outputs:
            job.outputs = job.outputs + ("dot",)

    report = run(job)
    text = report.dumps(timing=not args.no_timing)
    if job.report_path and "report" in job.outputs:
        with open(job.report_path, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    if job.dot_path and report.dot is not None:
        with open(job.dot_path, "w", encoding="utf-8") as fh:
            fh.write(report.dot)
    if report.error:
        err = report.error
        print(f"stablered: {err['type']} in stage {err['stage']}: {err['message']}", file=sys.stderr)
    elif args.verbose:
        d = report.data
        print(f"genus {d['genus']}, {len(d['components'])} component(s), "
              f"type {d['reduction_type']}, bound {d['monodromy_bound']['degree_bound']}", file=sys.stderr)
    return report.exit_code


if __name__ == "__main__":
    sys.exit(main())
