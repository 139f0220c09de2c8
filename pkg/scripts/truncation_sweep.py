"""Truncation sensitivity of T-BPTT on medium-ISI trace conditioning.

Sweeps the window length of an LSTM value network.  Expected ISI is 20
steps, so windows shorter than that cannot see from CS onset to US onset
and the error stays high; RTRL (no window) is included as the reference.

The step size is shared across windows and defaults low: long windows only
pull away from the CS-presence plateau when the ADAM steps are gentle
enough for the small long-range credit signal to survive the update noise.
"""

import argparse
import sys

from condbench.evaluate import aggregate_runs
from condbench.harness import (ExperimentConfig, apply_scale, method_label,
                               run_many, write_results)

TRUNCATIONS = (1, 2, 5, 10, 20, 40)


def build(args, engine, truncation=0):
    cfg = ExperimentConfig()
    cfg.env.isi_preset = "medium"
    cfg.method.kind = "rnn"
    cfg.method.cell = args.cell
    cfg.method.engine = engine
    cfg.method.truncation = truncation
    cfg.method.step_size = args.step_size
    cfg.run.steps = 500_000
    cfg.run.n_runs = args.runs
    cfg.run.seed = args.seed
    cfg.run.out_dir = args.out
    apply_scale(cfg, args.scale)
    return cfg


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out", default="results/truncation_sweep")
    parser.add_argument("--cell", default="lstm",
                        choices=("vanilla", "lstm", "gru"))
    parser.add_argument("--step-size", type=float, default=1e-4)
    parser.add_argument("--runs", type=int, default=10)
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--threads", type=int, default=None)
    parser.add_argument("--scale", type=float, default=1.0)
    args = parser.parse_args(argv)

    configs = [build(args, "tbptt", T) for T in TRUNCATIONS]
    configs.append(build(args, "rtrl"))
    for i, cfg in enumerate(configs):
        results = run_many(cfg, range(cfg.run.n_runs), args.threads)
        write_results(cfg, results, append=(i > 0))
        mean, se = aggregate_runs([r.msre for r in results])
        print(f"{method_label(cfg.method)} msre={mean:.5f} +/- {se:.5f}")
    print(f"wrote {args.out}/runs.csv")
    return 0


if __name__ == "__main__":
    sys.exit(main())
