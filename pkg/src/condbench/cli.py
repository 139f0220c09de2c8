"""Command-line entry point.

Subcommands: run / sweep / aggregate / profile.  `--threads` caps worker
processes; `--scale` shrinks steps and run counts proportionally for quick
passes (full scale stays the default).
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from . import harness


def _read(path: str) -> str:
    p = Path(path)
    if not p.exists():
        raise FileNotFoundError(f"config not found: {path}")
    return p.read_text(encoding="utf-8")


def _cmd_run(args) -> int:
    cfg = harness.parse_config(_read(args.config))
    harness.apply_scale(cfg, args.scale)
    results = harness.run_experiment(cfg, threads=args.threads,
                                     append=args.append)
    scores = [r.msre for r in results]
    if len(scores) >= 2:
        mean, se = harness.aggregate_runs(scores)
        print(f"{harness.problem_label(cfg.env)} "
              f"{harness.method_label(cfg.method)} n={len(scores)} "
              f"msre={mean:.6g} +/- {se:.3g}")
    else:
        print(f"{harness.problem_label(cfg.env)} "
              f"{harness.method_label(cfg.method)} n=1 msre={scores[0]:.6g}")
    print(f"wrote {Path(cfg.run.out_dir) / 'runs.csv'}")
    return 0


def _cmd_sweep(args) -> int:
    spec = harness.parse_sweep(_read(args.config))
    harness.apply_sweep_scale(spec, args.scale)
    winner, results = harness.sweep(spec, threads=args.threads)
    mean, se = harness.aggregate_runs([r.msre for r in results])
    chosen = ", ".join(f"{k}={harness.config_get(winner, k)}"
                       for k in sorted(spec.grid))
    print(f"best: {chosen}")
    print(f"final n={len(results)} msre={mean:.6g} +/- {se:.3g}")
    print(f"wrote {Path(winner.run.out_dir) / 'sweep.csv'}")
    return 0


def _cmd_aggregate(args) -> int:
    rows = harness.aggregate_dir(args.dir)
    for digest, problem, method, n, mean, se in rows:
        print(f"{problem} {method} n={n} msre={mean:.6g} +/- {se:.3g} "
              f"[{digest}]")
    return 0


def _cmd_profile(args) -> int:
    cfg = harness.parse_config(_read(args.config))
    harness.apply_scale(cfg, args.scale)
    harness.profile_run(cfg, args.run, args.trials, threads=args.threads)
    print(f"wrote {Path(cfg.run.out_dir) / 'profiles.csv'}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="condbench",
        description="Online multi-step prediction benchmarks.")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--threads", type=int, default=None,
                       help="max worker processes (default: all cores)")
        p.add_argument("--scale", type=float, default=1.0,
                       help="multiply steps and run counts by this factor")

    p_run = sub.add_parser("run", help="execute one config")
    p_run.add_argument("--config", required=True)
    p_run.add_argument("--append", action="store_true",
                       help="append to existing CSVs instead of overwriting")
    common(p_run)
    p_run.set_defaults(func=_cmd_run)

    p_sweep = sub.add_parser("sweep", help="grid search then final runs")
    p_sweep.add_argument("--config", required=True)
    common(p_sweep)
    p_sweep.set_defaults(func=_cmd_sweep)

    p_agg = sub.add_parser("aggregate", help="summarize runs.csv in a directory")
    p_agg.add_argument("--dir", required=True)
    p_agg.set_defaults(func=_cmd_aggregate)

    p_prof = sub.add_parser("profile",
                            help="re-run one run and write trial profiles")
    p_prof.add_argument("--config", required=True)
    p_prof.add_argument("--run", type=int, default=0,
                        help="run index to profile")
    p_prof.add_argument("--trials", type=int, default=10,
                        help="number of late trials to record")
    common(p_prof)
    p_prof.set_defaults(func=_cmd_profile)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
