"""Command-line front end: ``usvswarm run|plot|verify|presets``.

Exit codes: 0 success, 1 failed verification, 2 bad input (scenario,
override, trace, metric or suite), 3 numerical blow-up during a run.
"""
from __future__ import annotations

import argparse
import json
import sys
import time
from dataclasses import asdict
from pathlib import Path

from .dynamics import NumericalBlowUp
from .engine import run
from .plotting import METRICS, write_plots
from .scenario_io import (ScenarioError, apply_overrides, load_document, load_preset_document,
                          preset_names, scenario_from_dict)
from .traceio import read_trace, write_trace
from .verify import SUITES, report_json, run_suite

EXIT_OK, EXIT_FAIL, EXIT_INPUT, EXIT_BLOWUP = 0, 1, 2, 3


def _err(msg: str) -> None:
    print(f"usvswarm: error: {msg}", file=sys.stderr)


def _scenario_document(ref: str) -> dict:
    path = Path(ref)
    if path.suffix == ".json" or path.exists():
        if not path.is_file():
            raise ScenarioError(f"{ref}: scenario file not found")
        return load_document(path)
    return load_preset_document(ref)


def cmd_run(args) -> int:
    try:
        doc = _scenario_document(args.scenario)
        sets = list(args.set or [])
        if args.seed is not None:
            sets.append(f"seed={args.seed}")
        if args.duration is not None:
            sets.append(f"duration={args.duration}")
        doc = apply_overrides(doc, sets)
        sc = scenario_from_dict(doc)
    except ScenarioError as exc:
        _err(str(exc))
        return EXIT_INPUT

    out = Path(args.out)
    t0 = time.perf_counter()
    try:
        trace, outcome = run(sc)
    except NumericalBlowUp as exc:
        _err(f"numerical blow-up at t={exc.time} s (vessel {exc.vessel}): {exc}")
        return EXIT_BLOWUP
    elapsed = time.perf_counter() - t0

    out.mkdir(parents=True, exist_ok=True)
    write_trace(trace, out / "trace.csv")
    report = {"scenario": doc.get("name", args.scenario), "seed": sc.seed,
              "duration": sc.duration, "wall_clock_s": round(elapsed, 3), **asdict(outcome)}
    (out / "report.json").write_text(json.dumps(report, indent=2) + "\n")
    print(json.dumps(report, indent=2))
    return EXIT_OK


def cmd_plot(args) -> int:
    names = [m for item in args.metric for m in item.split(",") if m]
    unknown = [m for m in names if m not in METRICS]
    if unknown:
        _err(f"unknown metric(s) {', '.join(unknown)}; available: {', '.join(METRICS)}")
        return EXIT_INPUT
    try:
        trace = read_trace(args.trace)
    except (OSError, ValueError) as exc:
        _err(f"{args.trace}: {exc}")
        return EXIT_INPUT
    if not trace:
        _err(f"{args.trace}: trace is empty, nothing plotted")
        return EXIT_INPUT
    for p in write_plots(trace, names, args.out):
        print(p)
    return EXIT_OK


def cmd_verify(args) -> int:
    try:
        reports = run_suite(args.suite)
    except KeyError as exc:
        _err(exc.args[0])
        return EXIT_INPUT
    text = report_json(reports)
    if args.out:
        Path(args.out).write_text(text + "\n")
    print(text)
    return EXIT_OK if all(r.passed for r in reports) else EXIT_FAIL


def cmd_presets(args) -> int:
    for name in preset_names():
        print(f"{name}: {load_preset_document(name).get('description', '')}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="usvswarm", description="Multi-USV surrounding simulations.")
    sub = ap.add_subparsers(dest="command", required=True)

    r = sub.add_parser("run", help="simulate a scenario file or bundled preset")
    r.add_argument("scenario", help="path to a JSON scenario or a preset name")
    r.add_argument("--seed", type=int)
    r.add_argument("--duration", type=float)
    r.add_argument("--out", default="out", help="output directory (default: out)")
    r.add_argument("--set", action="append", metavar="KEY=VALUE",
                   help="override a scenario field, e.g. gains.kappa4=0.5 (repeatable)")
    r.set_defaults(func=cmd_run)

    p = sub.add_parser("plot", help="write one SVG per metric from a trace CSV")
    p.add_argument("trace")
    p.add_argument("--metric", action="append", required=True,
                   help=f"metric name(s), comma separated or repeated: {', '.join(METRICS)}")
    p.add_argument("--out", default="plots")
    p.set_defaults(func=cmd_plot)

    v = sub.add_parser("verify", help="run a property-verification suite")
    v.add_argument("suite", help=f"one of: {', '.join([*SUITES, 'all'])}")
    v.add_argument("--out", help="also write the JSON report here")
    v.set_defaults(func=cmd_verify)

    s = sub.add_parser("presets", help="list bundled scenarios")
    s.set_defaults(func=cmd_presets)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
