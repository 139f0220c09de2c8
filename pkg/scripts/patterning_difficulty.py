"""Noisy patterning across difficulty presets and recurrent cells.

Error should grow from easy to hard (more stored patterns, more distractor
channels, higher outcome noise), and the echo state network should trail
every trained recurrent cell because only its readout learns.
"""

import argparse
import sys

from condbench.evaluate import aggregate_runs
from condbench.harness import (ExperimentConfig, apply_scale, method_label,
                               problem_label, run_many, write_results)

DIFFICULTIES = ("easy", "medium", "hard")
CELLS = ("vanilla", "lstm", "gru")


def build(args, difficulty, method, cell="lstm"):
    cfg = ExperimentConfig()
    cfg.env.kind = "noisy_patterning"
    cfg.env.difficulty = difficulty
    cfg.method.kind = method
    cfg.method.cell = cell
    cfg.method.truncation = args.truncation
    cfg.method.step_size = args.step_size
    cfg.run.steps = 500_000
    cfg.run.n_runs = args.runs
    cfg.run.seed = args.seed
    cfg.run.out_dir = args.out
    apply_scale(cfg, args.scale)
    return cfg


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out", default="results/patterning_difficulty")
    parser.add_argument("--truncation", type=int, default=5)
    parser.add_argument("--step-size", type=float, default=1e-3)
    parser.add_argument("--runs", type=int, default=10)
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--threads", type=int, default=None)
    parser.add_argument("--scale", type=float, default=1.0)
    args = parser.parse_args(argv)

    configs = [build(args, diff, "rnn", cell)
               for diff in DIFFICULTIES for cell in CELLS]
    configs += [build(args, diff, "esn") for diff in DIFFICULTIES]
    for i, cfg in enumerate(configs):
        results = run_many(cfg, range(cfg.run.n_runs), args.threads)
        write_results(cfg, results, append=(i > 0))
        mean, se = aggregate_runs([r.msre for r in results])
        print(f"{problem_label(cfg.env)} {method_label(cfg.method)} "
              f"msre={mean:.5f} +/- {se:.5f}")
    print(f"wrote {args.out}/runs.csv")
    return 0


if __name__ == "__main__":
    sys.exit(main())
