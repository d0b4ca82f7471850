"""Command line entry point: ``dyadbmo <command> [flags]``."""
from __future__ import annotations

import argparse
import sys
from typing import Optional, Sequence

from .circle import InadmissibleShift
from .harness import COMMANDS, ExperimentConfig, run_experiment, to_csv

HELP = {
    "d-delta": "exact d(delta) for each --delta",
    "fit": "fit random or given arcs into a dyadic interval",
    "norms": "dyadic and classical BMO norms of a function",
    "verify": "check the circle BMO equivalence on a function or the demo corpus",
    "verify-md": "check the product-cube equivalence on T^2 functions",
    "verify-r": "nesting of the line filtration and fits of random intervals",
    "maximal": "pointwise sharp and maximal domination on grid points",
    "atoms": "rescale random atoms to dyadic atoms and decompose combinations",
    "scan": "table of d(p/q) for all q <= --max-q",
}


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="dyadbmo", description="Exact checks of translated dyadic BMO inequalities.")
    sub = p.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        c = sub.add_parser(name, help=HELP[name])
        c.add_argument("--delta", action="append", dest="shifts", metavar="P/Q",
                       help="shift (repeatable); defaults depend on the command")
        c.add_argument("--depth", type=int)
        c.add_argument("--grid-per-axis", type=int)
        c.add_argument("--seed", type=int, default=0)
        c.add_argument("--count", type=int, default=1000, help="random samples for fit, verify-r and atoms")
        c.add_argument("--max-q", type=int, default=12)
        c.add_argument("--function", help="StepFn or GridFn JSON file")
        c.add_argument("--arc", action="append", dest="arcs", default=[],
                       help="start:length on the circle, a:b on the line for verify-r")
        c.add_argument("--workers", type=int, default=1)
        c.add_argument("--witness-dir")
        c.add_argument("--out")
        c.add_argument("--format", choices=("json", "csv"), default="json")
    r = sub.add_parser("run", help="run a saved ExperimentConfig")
    r.add_argument("--config", required=True)
    r.add_argument("--out")
    r.add_argument("--format", choices=("json", "csv"), default="json")
    return p


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "run":
            cfg = ExperimentConfig.load(args.config)
        else:
            cfg = ExperimentConfig(command=args.command, seed=args.seed, shifts=args.shifts, depth=args.depth,
                                   grid_per_axis=args.grid_per_axis, count=args.count, max_q=args.max_q,
                                   function=args.function, arcs=args.arcs, workers=args.workers,
                                   witness_dir=args.witness_dir)
        report = run_experiment(cfg)
        text = to_csv(report) if args.format == "csv" else report.dumps()
    except (InadmissibleShift, ValueError, TypeError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    if not report.ok:
        print(f"{len(report.violations)} violation(s); replay commands are in the report", file=sys.stderr)
        return 1
    return 0
