"""Command-line entry point.

Verbs:
  run <scenario-file>     integrate a scenario, write CSV/SVG/manifest
  sweep --pmax N          structure analysis for every odd p <= N
  analyze <system-file>   coupling-structure report for a saved system
  equilibria <system-file>  Newton search for static points

Exit codes: 0 success, 1 usage/config error, 2 divergence detected,
3 assertion failure inside a sweep.  The default output directory is
$FPUALT_OUT_DIR, falling back to ./fpualt_out.
"""

import argparse
import os
import sys
from pathlib import Path

from . import __version__
from .scenarios import (ScenarioError, analysis_report, equilibria_report,
                        run_scenario, sweep_odd_p, sweep_report_text)
from .spectral import load_system

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DIVERGED = 2
EXIT_SWEEP_FAIL = 3


def _default_out_dir():
    return os.environ.get("FPUALT_OUT_DIR", "fpualt_out")


def build_parser():
    parser = argparse.ArgumentParser(
        prog="fpualt",
        description="Alternating-mass FPU chains: experiments and "
                    "coupling-structure analysis.")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="verb", required=True)

    run = sub.add_parser("run", help="run a scenario file")
    run.add_argument("scenario", help="path to a scenario file")
    run.add_argument("--out-dir", default=None)
    run.add_argument("--abs-tol", type=float, default=None)
    run.add_argument("--rel-tol", type=float, default=None)
    run.add_argument("--t-end", type=float, default=None)
    run.add_argument("--sample-dt", type=float, default=None)

    sweep = sub.add_parser("sweep", help="analyse every odd p up to --pmax")
    sweep.add_argument("--pmax", type=int, default=47)
    sweep.add_argument("--a", type=float, default=0.01)
    sweep.add_argument("--alpha", type=float, default=1.0)
    sweep.add_argument("--out-dir", default=None)

    analyze = sub.add_parser("analyze", help="structure report for a system file")
    analyze.add_argument("system", help="path to a saved system file")
    analyze.add_argument("--out-dir", default=None)

    eq = sub.add_parser("equilibria", help="equilibrium search for a system file")
    eq.add_argument("system", help="path to a saved system file")
    eq.add_argument("--out-dir", default=None)
    eq.add_argument("--alpha", type=float, default=None)
    return parser


def _out_dir(args):
    out = Path(args.out_dir or _default_out_dir())
    out.mkdir(parents=True, exist_ok=True)
    return out


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.verb == "run":
            overrides = {k: v for k, v in (
                ("abs_tol", args.abs_tol), ("rel_tol", args.rel_tol),
                ("t_end", args.t_end), ("sample_dt", args.sample_dt))
                if v is not None}
            result = run_scenario(args.scenario, _out_dir(args), overrides)
            print(f"{result.scenario.name}: {result.trajectory.status} "
                  f"(t_reached {result.trajectory.t_reached:g}, "
                  f"{result.trajectory.n_steps} steps)")
            if result.manifest.get("energy_drift") is not None:
                print(f"  energy drift {result.manifest['energy_drift']:.3e}")
            for f in result.files:
                print(f"  wrote {f}")
            return EXIT_OK if result.exit_code == 0 else EXIT_DIVERGED

        if args.verb == "sweep":
            report = sweep_odd_p(p_max=args.pmax, a=args.a, alpha=args.alpha)
            text = sweep_report_text(report)
            out = _out_dir(args) / f"sweep_p{args.pmax}.txt"
            out.write_text(text)
            print(text, end="")
            print(f"wrote {out}")
            return EXIT_SWEEP_FAIL if report.failures else EXIT_OK

        if args.verb == "analyze":
            sys_ = load_system(args.system)
            text = analysis_report(sys_)
            out = _out_dir(args) / (Path(args.system).stem + "_analysis.txt")
            out.write_text(text)
            print(text, end="")
            print(f"wrote {out}")
            return EXIT_OK

        if args.verb == "equilibria":
            sys_ = load_system(args.system)
            text = equilibria_report(sys_, alpha=args.alpha)
            out = _out_dir(args) / (Path(args.system).stem + "_equilibria.txt")
            out.write_text(text)
            print(text, end="")
            print(f"wrote {out}")
            return EXIT_OK
    except (ScenarioError, FileNotFoundError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    return EXIT_USAGE


if __name__ == "__main__":
    raise SystemExit(main())
