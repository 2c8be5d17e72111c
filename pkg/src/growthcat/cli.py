"""Command line: ``growthcat {classify,analyze,simulate,verify} --model M ...``.

Exit codes: 0 ok, 1 a verification check failed, 2 usage or model error,
3 numerical failure.
"""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import analysis, montecarlo
from .embedded import chain_csv, run_chain
from .hazard import AssumptionError
from .model import ModelError, fixture_names, load_model, validate
from .numerics import NumericalError
from .simulate import SimulationError, StopRule
from .streams import stream

EXIT_FAIL = 1
EXIT_USAGE = 2
EXIT_NUMERIC = 3


class UsageError(Exception):
    pass


def _grid(text):
    try:
        lo, hi, n = text.split(":")
        lo, hi, n = float(lo), float(hi), int(n)
    except ValueError:
        raise argparse.ArgumentTypeError(f"grid must be lo:hi:n, got {text!r}") from None
    if n < 1 or not hi >= lo or lo < 0:
        raise argparse.ArgumentTypeError("grid needs 0 <= lo <= hi and n >= 1")
    return np.linspace(lo, hi, n)


def _stop(text):
    try:
        return StopRule.parse(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _positive_int(text):
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError("must be a positive integer")
    return v


def build_parser():
    p = argparse.ArgumentParser(prog="growthcat",
                                description="Growth-with-catastrophe processes: exact simulation, "
                                            "analytic quantities and Monte Carlo checks.")
    sub = p.add_subparsers(dest="command", required=True)

    def add(name, help):
        sp = sub.add_parser(name, help=help)
        sp.add_argument("--model", required=True,
                        help="model JSON file or bundled fixture name "
                             f"({', '.join(fixture_names())})")
        return sp

    add("classify", "boundary classification and recurrence verdict as JSON")

    sp = add("analyze", "tabulate s, pi, u and the up-exit probability as CSV")
    sp.add_argument("--grid", type=_grid, required=True, help="lo:hi:n")
    sp.add_argument("--b", type=float, default=None, help="upper level for p_exit_b")
    sp.add_argument("--out", type=Path, default=None, help="CSV file (default stdout)")
    sp.add_argument("--plot", action="store_true", help="also write <out>.png")

    sp = add("simulate", "simulate paths and write one CSV per path")
    sp.add_argument("--out", type=Path, required=True, help="output directory")
    sp.add_argument("--n", type=_positive_int, default=1)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--stop", type=_stop, default=None,
                    help="comma list, e.g. hit_zero,horizon=100,max_jumps=1000")
    sp.add_argument("--x0", type=float, default=1.0, help="starting value")
    sp.add_argument("--chain", type=_positive_int, default=None, metavar="STEPS",
                    help="write the embedded chain (n,dt,u,z) for STEPS jumps instead")
    sp.add_argument("--threads", type=_positive_int, default=1)
    sp.add_argument("--plot", action="store_true", help="also write paths.png")

    sp = add("verify", "Monte Carlo checks of the analytic layer; JSON report")
    sp.add_argument("--n", type=_positive_int, default=10_000)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--threads", type=_positive_int, default=1)
    sp.add_argument("--out", type=Path, default=None, help="JSON file (default stdout)")
    sp.add_argument("--plot", action="store_true", help="also write <out>.png")
    return p


def _emit(text, out):
    if out is None:
        sys.stdout.write(text)
    else:
        out.parent.mkdir(parents=True, exist_ok=True)
        out.write_text(text)


def _need_out_for_plot(args):
    if args.plot and args.out is None:
        raise UsageError("--plot needs --out")


def cmd_classify(spec, args):
    report = analysis.classify(spec).to_dict()
    v = validate(spec)
    report["violations"] = list(v.violations)
    _emit(montecarlo.report_json(report), None)
    return 0


def cmd_analyze(spec, args):
    _need_out_for_plot(args)
    curve = analysis.analytic_curve(spec, args.grid, args.b)
    _emit(curve.to_csv(), args.out)
    if args.plot:
        from .plotting import plot_curve
        plot_curve(curve, args.out.with_suffix(".png"), spec.name)
    return 0


def cmd_simulate(spec, args):
    out = args.out
    out.mkdir(parents=True, exist_ok=True)
    width = max(5, len(str(args.n - 1)))
    files = []
    if args.chain is not None:
        if args.stop is not None:
            raise UsageError("--stop does not apply with --chain")
        ends = []
        for i in range(args.n):
            dts, us, zs, outcome = run_chain(spec, args.x0, args.chain, stream(args.seed, i))
            name = f"chain_{i:0{width}d}.csv"
            (out / name).write_text(chain_csv(dts, us, zs))
            files.append(name)
            ends.append(None if outcome is None else type(outcome).__name__)
        manifest_extra = {"chain_steps": args.chain, "terminations": ends}
    else:
        if args.stop is None:
            raise UsageError("simulate needs --stop (or --chain)")
        trajs = montecarlo.simulate_many(spec, args.x0, args.stop, args.n, args.seed, args.threads)
        for i, traj in enumerate(trajs):
            name = f"path_{i:0{width}d}.csv"
            (out / name).write_text(traj.to_csv())
            files.append(name)
        manifest_extra = {"stop": str(args.stop),
                          "terminals": [t.terminal.status.value for t in trajs]}
        if args.plot:
            from .plotting import plot_trajectories
            plot_trajectories(spec, trajs, out / "paths.png", spec.name)
    manifest = {"model": spec.to_dict(), "name": spec.name, "x0": args.x0, "n": args.n,
                "seed": args.seed, **manifest_extra, "files": files}
    (out / "manifest.json").write_text(json.dumps(manifest, indent=2) + "\n")
    return 0


def cmd_verify(spec, args):
    _need_out_for_plot(args)
    records = montecarlo.verify(spec, args.n, args.seed, args.threads)
    _emit(montecarlo.report_json(records), args.out)
    if args.plot:
        from .plotting import plot_verification
        plot_verification(records, args.out.with_suffix(".png"), spec.name)
    failed = [r["check"] for r in records if not r["pass"]]
    for name in failed:
        print(f"FAILED {name}", file=sys.stderr)
    return EXIT_FAIL if failed else 0


COMMANDS = {"classify": cmd_classify, "analyze": cmd_analyze, "simulate": cmd_simulate,
            "verify": cmd_verify}


def run(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else EXIT_USAGE
    try:
        spec = load_model(args.model)
        return COMMANDS[args.command](spec, args)
    except (ModelError, UsageError) as exc:
        print(f"growthcat: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (NumericalError, SimulationError, AssumptionError,
            analysis.NotPositiveRecurrent, analysis.UnsupportedKernel, analysis.ZeroNotReflecting,
            montecarlo.EstimationError) as exc:
        print(f"growthcat: numerical failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


def main():
    sys.exit(run())
