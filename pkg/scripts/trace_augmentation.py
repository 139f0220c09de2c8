"""Input trace augmentation vs truncation length on long-ISI conditioning.

Appending decaying onset traces to the observation gives a short-window
network a long-horizon summary for free, so the augmented LSTM at a small
truncation should match or beat the plain LSTM at a much larger one.
"""

import argparse
import sys

from condbench.evaluate import aggregate_runs
from condbench.harness import (ExperimentConfig, apply_scale, method_label,
                               run_many, write_results)

TRUNCATIONS = (5, 10, 20, 40)


def build(args, truncation, augment):
    cfg = ExperimentConfig()
    cfg.env.isi_preset = "long"
    cfg.method.kind = "rnn"
    cfg.method.cell = "lstm"
    cfg.method.engine = "tbptt"
    cfg.method.truncation = truncation
    cfg.method.augment = augment
    cfg.method.step_size = args.step_size
    cfg.run.steps = 500_000
    cfg.run.n_runs = args.runs
    cfg.run.seed = args.seed
    cfg.run.out_dir = args.out
    apply_scale(cfg, args.scale)
    return cfg


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out", default="results/trace_augmentation")
    parser.add_argument("--step-size", type=float, default=1e-3)
    parser.add_argument("--runs", type=int, default=10)
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--threads", type=int, default=None)
    parser.add_argument("--scale", type=float, default=1.0)
    args = parser.parse_args(argv)

    configs = [build(args, T, aug)
               for aug in (False, True) for T in TRUNCATIONS]
    for i, cfg in enumerate(configs):
        results = run_many(cfg, range(cfg.run.n_runs), args.threads)
        write_results(cfg, results, append=(i > 0))
        mean, se = aggregate_runs([r.msre for r in results])
        print(f"{method_label(cfg.method)} msre={mean:.5f} +/- {se:.5f}")
    print(f"wrote {args.out}/runs.csv")
    return 0


if __name__ == "__main__":
    sys.exit(main())
