"""Fixed-representation comparison on short-ISI trace conditioning.

Runs presence, tile-coded traces, and microstimulus features with linear
TD(lambda), each at its best step size from a small grid, into one shared
results directory.  Presence can only track the CS while it is on, so its
error stays far above the trace-based representations.
"""

import argparse
import sys

from condbench.evaluate import aggregate_runs
from condbench.harness import (ExperimentConfig, apply_scale, config_set,
                               method_label, run_many, write_results)

GRID = (3e-4, 1e-3, 3e-3)
METHODS = ("presence", "tile_coded_traces", "microstimulus")


def build(method, alpha, args):
    cfg = ExperimentConfig()
    cfg.env.isi_preset = "short"
    cfg.method.kind = method
    cfg.method.step_size = alpha
    cfg.run.steps = 200_000
    cfg.run.n_runs = args.runs
    cfg.run.seed = args.seed
    cfg.run.out_dir = args.out
    apply_scale(cfg, args.scale)
    return cfg


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out", default="results/fixed_representations")
    parser.add_argument("--runs", type=int, default=5)
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--threads", type=int, default=None)
    parser.add_argument("--scale", type=float, default=1.0)
    args = parser.parse_args(argv)

    for i, method in enumerate(METHODS):
        best = None
        for alpha in GRID:
            cfg = build(method, alpha, args)
            results = run_many(cfg, range(cfg.run.n_runs), args.threads)
            mean, se = aggregate_runs([r.msre for r in results])
            print(f"{method} a={alpha:g} msre={mean:.5f} +/- {se:.5f}")
            if best is None or mean < best[0]:
                best = (mean, cfg, results)
        _, cfg, results = best
        write_results(cfg, results, append=(i > 0))
        print(f"-> kept {method_label(cfg.method)} "
              f"a={cfg.method.step_size:g}")
    print(f"wrote {args.out}/runs.csv")
    return 0


if __name__ == "__main__":
    sys.exit(main())
