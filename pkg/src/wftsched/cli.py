"""Command-line entry point: generate, run, compare, verify.

Exit codes: 0 success, 1 verification violation, 2 usage/config error, 3 I/O error.
"""

from __future__ import annotations

import argparse
import logging
import os
import sys
from fractions import Fraction
from pathlib import Path

from . import harness
from .engine import default_delta, simulate, weight_trace, write_segments_csv, write_weight_csv
from .instance import (
    DEFAULT_PROC_RANGE,
    DEFAULT_RELEASE_RANGE,
    DEFAULT_WEIGHT_RANGE,
    InstanceFormatError,
    format_rational,
    generate_instance,
    instance_stats,
    parse_instance,
    serialize_instance,
)
from .oracle import DEFAULT_LIMIT, OracleLimitError, brute_force_opt
from .schedulers import SchedulerKind
from .verify import reports_to_csv

OUTPUT_DIR_ENV = "WFTSCHED_OUTPUT_DIR"

EXIT_OK, EXIT_VIOLATION, EXIT_USAGE, EXIT_IO = 0, 1, 2, 3

log = logging.getLogger("wftsched")


class UsageError(Exception):
    pass


def _rational(text: str) -> Fraction:
    try:
        return Fraction(text)
    except (ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(f"not a rational number: {text!r}") from None


def _range(text: str) -> tuple[Fraction, Fraction]:
    lo, sep, hi = text.partition(":")
    if not sep:
        raise argparse.ArgumentTypeError(f"expected LO:HI, got {text!r}")
    return _rational(lo), _rational(hi)


def _show(x: Fraction) -> str:
    return f"{format_rational(x)} (~{float(x):.6g})"


def output_dir() -> Path:
    return Path(os.environ.get(OUTPUT_DIR_ENV, "."))


def _read_instance(path: str):
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise OSError(f"cannot read instance {path}: {exc.strerror or exc}") from exc
    try:
        inst = parse_instance(text)
    except InstanceFormatError as exc:
        raise UsageError(f"{path}: {exc}") from exc
    if len(inst) == 0:
        raise UsageError(f"{path}: instance has no jobs")
    return inst


def _run_for(inst, args):
    kind = SchedulerKind.parse(args.algo)
    if args.mode == "exact" and not kind.piecewise_constant:
        raise UsageError(
            f"exact mode is not available for --algo {args.algo}: its bin scores decrease "
            "continuously between events; use --mode quantum (optionally with --delta)"
        )
    if args.mode == "exact" and args.delta is not None:
        raise UsageError("--delta only applies to --mode quantum")
    if args.delta is not None and args.delta <= 0:
        raise UsageError("--delta must be positive")
    delta = None
    if args.mode == "quantum":
        delta = args.delta if args.delta is not None else default_delta(inst)
    return simulate(inst, kind, args.mode, delta)


def cmd_generate(args) -> int:
    if args.n < 1:
        raise UsageError("--n must be at least 1")
    if args.max_den < 1:
        raise UsageError("--max-den must be at least 1")
    try:
        inst = generate_instance(args.n, args.seed, args.p_range, args.w_range, args.r_range, args.max_den)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    out = Path(args.output) if args.output else output_dir() / f"instance-n{args.n}-seed{args.seed}.inst"
    st = instance_stats(inst)
    header = (
        f"seed {args.seed} n {args.n} max_den {args.max_den}\n"
        f"P {format_rational(st.p_ratio)} W {format_rational(st.w_ratio)} D {format_rational(st.d_ratio)}"
    )
    out.write_text(serialize_instance(inst, header), encoding="utf-8")
    print(f"# seed {args.seed}")
    print(f"wrote {len(inst)} jobs to {out}")
    print(f"P = {_show(st.p_ratio)}")
    print(f"W = {_show(st.w_ratio)}")
    print(f"D = {_show(st.d_ratio)}")
    return EXIT_OK


def cmd_run(args) -> int:
    inst = _read_instance(args.input)
    run = _run_for(inst, args)
    stem = Path(args.input).stem
    seg_path = Path(args.trace) if args.trace else output_dir() / f"{stem}.{args.algo}.segments.csv"
    w_path = Path(args.weights) if args.weights else output_dir() / f"{stem}.{args.algo}.weights.csv"
    with open(seg_path, "w", encoding="utf-8") as fh:
        write_segments_csv(run, fh, decimal=args.decimal)
    with open(w_path, "w", encoding="utf-8") as fh:
        write_weight_csv(weight_trace(run, inst, "original"), fh, decimal=args.decimal)
    if args.rounded_weights:
        with open(args.rounded_weights, "w", encoding="utf-8") as fh:
            write_weight_csv(weight_trace(run, inst, "rounded"), fh, decimal=args.decimal)
    print(f"algorithm {run.kind.name} mode {run.mode}" + (f" delta {format_rational(run.delta)}" if run.delta else ""))
    print(f"cost = {_show(run.cost)}")
    if run.kind is SchedulerKind.COMBINED:
        print(f"opened bins = {len(run.opened_bins)}")
    print(f"segments -> {seg_path}")
    print(f"weights -> {w_path}")
    return EXIT_OK


def cmd_compare(args) -> int:
    inst = _read_instance(args.input)
    if len(inst) > args.limit:
        raise UsageError(
            f"instance has {len(inst)} jobs but the brute-force oracle is limited to {args.limit}; "
            "raise --limit at your own risk (search time grows exponentially)"
        )
    run = _run_for(inst, args)
    opt = brute_force_opt(inst, args.limit)
    opt_rounded = brute_force_opt(run.rounded_instance(), args.limit)
    kind = run.kind
    ratio = run.cost / opt.cost
    print(f"algorithm {kind.name} mode {run.mode}")
    print(f"ALG cost            = {_show(run.cost)}")
    print(f"OPT cost (original) = {_show(opt.cost)}")
    print(f"OPT cost (rounded)  = {_show(opt_rounded.cost)}")
    print(f"ratio ALG/OPT       = {_show(ratio)}")
    if kind in harness.COMPETITIVE_C:
        print(f"bound 2*2c*(ceil(log2 R)+1) = {_show(harness.end_to_end_bound(kind, inst))}")
    if kind is SchedulerKind.COMBINED:
        print(f"bound 60*(ceil(log2 min(W,P,D))+1) = {_show(harness.combined_log_bound(inst))}")
    return EXIT_OK


def cmd_verify(args) -> int:
    suite = args.suite
    if suite not in harness.SUITES:
        raise UsageError(f"unknown suite {suite!r}; choose from {', '.join(sorted(harness.SUITES))}")
    print(f"# suite {suite} seed {args.seed}")
    if suite == "axioms":
        reports = harness.suite_axioms(args.trials, args.seed)
    elif suite == "goodness":
        reports = harness.suite_goodness(args.algo, args.instances, args.seed, c=args.c)
    elif suite == "structure":
        reports = harness.suite_structure(args.algo, args.instances, args.seed)
    elif suite == "flow":
        reports = harness.suite_flow(args.instances, args.seed)
    elif suite == "competitive":
        reports = harness.suite_competitive(args.instances, args.seed)
    elif suite == "convergence":
        reports = harness.suite_convergence(args.instances, args.seed, args.algo)
    elif suite == "bincount":
        reports = harness.suite_bincount(args.instances, args.seed)
    else:
        reports = harness.SUITES[suite]()
    for r in reports:
        print(r.summary())
        for w in r.violations[: args.show]:
            print(f"  violation: {w}")
        for w in r.flagged[: args.show]:
            print(f"  flagged: {w}")
    if args.csv:
        Path(args.csv).write_text(reports_to_csv(reports), encoding="utf-8")
    return EXIT_OK if all(r.passed for r in reports) else EXIT_VIOLATION


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="wftsched", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    g = sub.add_parser("generate", help="write a seeded random instance")
    g.add_argument("--n", type=int, required=True)
    g.add_argument("--seed", type=int, required=True)
    g.add_argument("--p-range", type=_range, default=DEFAULT_PROC_RANGE, metavar="LO:HI")
    g.add_argument("--w-range", type=_range, default=DEFAULT_WEIGHT_RANGE, metavar="LO:HI")
    g.add_argument("--r-range", type=_range, default=DEFAULT_RELEASE_RANGE, metavar="LO:HI")
    g.add_argument("--max-den", type=int, default=8)
    g.add_argument("-o", "--output")
    g.set_defaults(func=cmd_generate)

    def sim_args(p):
        p.add_argument("--algo", default="p", choices=["p", "d", "w", "min"])
        p.add_argument("--mode", default="exact", choices=["exact", "quantum"])
        p.add_argument("--delta", type=_rational, default=None,
                       help="quantum length; default is the smallest processing time / 16")
        p.add_argument("--input", required=True)

    r = sub.add_parser("run", help="simulate a policy on an instance file")
    sim_args(r)
    r.add_argument("--trace", help="segment CSV path")
    r.add_argument("--weights", help="W(t) CSV path (original weights)")
    r.add_argument("--rounded-weights", help="also write W(t) with rounded weights here")
    r.add_argument("--decimal", action="store_true", help="add decimal columns to CSVs")
    r.set_defaults(func=cmd_run)

    c = sub.add_parser("compare", help="compare a policy with the brute-force optimum")
    sim_args(c)
    c.add_argument("--limit", type=int, default=DEFAULT_LIMIT)
    c.set_defaults(func=cmd_compare)

    v = sub.add_parser("verify", help="run a verification suite over a seeded corpus")
    v.add_argument("--suite", required=True)
    v.add_argument("--algo", default="p", choices=["p", "d", "w", "min"])
    v.add_argument("--instances", type=int, default=500)
    v.add_argument("--trials", type=int, default=10_000)
    v.add_argument("--seed", type=int, default=1)
    v.add_argument("--c", type=_rational, default=None, help="override the goodness constant")
    v.add_argument("--csv", help="write check,instances,violations,max_ratio rows here")
    v.add_argument("--show", type=int, default=3, help="witnesses to print per check")
    v.set_defaults(func=cmd_verify)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code not in (0, None) else EXIT_OK
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except (UsageError, OracleLimitError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
