"""Command line front end: run scenario files, list bundled ones, plot reports."""

from __future__ import annotations

import argparse
import json
import os
import sys
from typing import List, Optional

from . import runner, scenarios
from .errors import CauchyKitError


def _default_outdir() -> str:
    return os.environ.get("CAUCHYKIT_OUT", "cauchykit_out")


def _resolve_specs(names: List[str]) -> List[dict]:
    specs = []
    for name in names:
        if os.path.isfile(name):
            specs.append(scenarios.load_scenario(name))
        else:
            specs.append(scenarios.load_bundled(name))
    return specs


def _cmd_run(args) -> int:
    names = args.scenario or scenarios.bundled_names()
    specs = _resolve_specs(names)
    if args.seed is not None:
        for s in specs:
            s["seed"] = args.seed
    report, timings = runner.run_report(
        specs, tol_scale=args.tol_scale, oracle=args.oracle, jobs=args.jobs)
    path = runner.write_report(report, timings, args.out)
    for entry in report["scenarios"]:
        line = f"{entry['name']:<28s} {entry['kind']:<11s} {entry['status']}"
        if entry["status"] == "error":
            line += f"  ({entry['error']})"
        else:
            failed = [c["name"] for c in entry["checks"] if not c["passed"]]
            if failed:
                line += "  failed: " + ", ".join(failed)
        print(line)
    s = report["summary"]
    print(f"{s['ok']}/{s['total']} ok, {s['mismatch']} mismatch, "
          f"{s['error']} error -> {path}")
    if args.plots:
        # exit status belongs to the checks; a scenario subset with
        # nothing plottable is not a failure of the run
        written = runner.emit_plot_data(report, args.out, strict=False)
        print(f"wrote {len(written)} plot artifacts")
    return 0 if s["ok"] == s["total"] else 1


def _cmd_list(args) -> int:
    for name in scenarios.bundled_names():
        spec = scenarios.load_bundled(name)
        print(f"{name:<28s} {spec['kind']}")
    return 0


def _cmd_plot(args) -> int:
    with open(args.report, "r", encoding="utf-8") as fh:
        report = json.load(fh)
    outdir = args.out or os.path.dirname(os.path.abspath(args.report))
    written = runner.emit_plot_data(report, outdir, kinds=args.kind or None)
    for path in written:
        print(path)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cauchykit",
        description="Boundary-value experiments for first order systems "
                    "on an interval.")
    parser.add_argument("--list", action="store_true", dest="list_bundled",
                        help="enumerate bundled scenarios and exit")
    sub = parser.add_subparsers(dest="command")

    run_p = sub.add_parser("run", help="run scenario files or bundled scenarios")
    run_p.add_argument("scenario", nargs="*",
                       help="paths to scenario JSON files or bundled names "
                            "(default: all bundled)")
    run_p.add_argument("--out", default=_default_outdir(),
                       help="output directory (env CAUCHYKIT_OUT)")
    run_p.add_argument("--seed", type=int, default=None,
                       help="override the seed of every scenario")
    run_p.add_argument("--tol-scale", type=float, default=1.0,
                       help="multiply expectation tolerances")
    run_p.add_argument("--oracle", action="store_true",
                       help="also run independent grid-based checks")
    run_p.add_argument("--jobs", type=int, default=1,
                       help="scenario-level process parallelism")
    run_p.add_argument("--plots", action="store_true",
                       help="emit CSV/SVG artifacts next to the report")
    run_p.set_defaults(fn=_cmd_run)

    list_p = sub.add_parser("list", help="list bundled scenarios")
    list_p.set_defaults(fn=_cmd_list)

    plot_p = sub.add_parser("plot", help="emit plot artifacts from a report")
    plot_p.add_argument("report", help="path to a report.json")
    plot_p.add_argument("--out", default=None,
                        help="output directory (default: alongside report)")
    plot_p.add_argument("--kind", action="append",
                        choices=["eigen_trajectories", "principal_angles",
                                 "convergence"],
                        help="restrict artifact kinds (repeatable)")
    plot_p.set_defaults(fn=_cmd_plot)
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if getattr(args, "list_bundled", False) or args.command == "list":
            return _cmd_list(args)
        if args.command is None:
            parser.print_usage(sys.stderr)
            return 2
        return args.fn(args)
    except CauchyKitError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
