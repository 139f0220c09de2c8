"""Return computation and scoring.

The target at step t is the discounted sum of future US activation,
G_t = sum_k gamma^k US_{t+k+1}, computed backward over the whole log via
G_t = US_{t+1} + gamma G_{t+1} with G_last = 0.  Because the log ends before
the US sequence does, the last H = ceil(ln eps / ln gamma) steps carry
truncated targets and are excluded from every score.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
from scipy.signal import lfilter

from .learn import PredictionLog

TAIL_EPSILON = 1e-6


def tail_horizon(gamma: float, eps: float = TAIL_EPSILON) -> int:
    """Steps at the end of a log whose targets are off by more than eps in
    the worst case.  gamma = 0 still loses the very last step (its target
    needs the unseen next observation)."""
    if not 0.0 <= gamma < 1.0:
        raise ValueError("gamma must be in [0, 1)")
    if gamma == 0.0:
        return 1
    return math.ceil(math.log(eps) / math.log(gamma))


@dataclass
class ReturnSeries:
    g: np.ndarray
    gamma: float
    horizon: int

    @property
    def n_scored(self) -> int:
        return max(0, len(self.g) - self.horizon)


def compute_returns(us: np.ndarray, gamma: float,
                    eps: float = TAIL_EPSILON) -> ReturnSeries:
    us = np.asarray(us, dtype=np.float64)
    h = tail_horizon(gamma, eps)
    n = len(us)
    g = np.zeros(n)
    if n > 1:
        # G_t = US_{t+1} + gamma G_{t+1} is a first-order IIR filter run
        # backward over US_{t+1}.
        rev = lfilter([1.0], [1.0, -gamma], us[:0:-1])
        g[:n - 1] = rev[::-1]
    return ReturnSeries(g=g, gamma=gamma, horizon=h)


def msre(v: np.ndarray, returns: ReturnSeries) -> float:
    """Mean squared return error over the scored prefix of the log."""
    v = np.asarray(v, dtype=np.float64)
    if len(v) != len(returns.g):
        raise ValueError("prediction and return lengths differ")
    n = returns.n_scored
    if n < 1:
        raise ValueError("log shorter than the excluded tail")
    d = v[:n] - returns.g[:n]
    return float(np.dot(d, d) / n)


def binned_curve(v: np.ndarray, returns: ReturnSeries,
                 bin_size: int) -> list[tuple[int, float]]:
    """MSRE per contiguous bin of scored steps: [(bin_start, bin_msre), ...].
    The last bin may be shorter than ``bin_size``."""
    if bin_size < 1:
        raise ValueError("bin_size must be positive")
    v = np.asarray(v, dtype=np.float64)
    if len(v) != len(returns.g):
        raise ValueError("prediction and return lengths differ")
    n = returns.n_scored
    out = []
    for start in range(0, n, bin_size):
        stop = min(start + bin_size, n)
        d = v[start:stop] - returns.g[start:stop]
        out.append((start, float(np.dot(d, d) / (stop - start))))
    return out


def aggregate_runs(values: Sequence[float]) -> tuple[float, float]:
    """Mean and standard error (sample std / sqrt(n)) over per-run scores."""
    n = len(values)
    if n < 2:
        raise ValueError("need at least 2 runs to aggregate")
    arr = np.asarray(values, dtype=np.float64)
    mean = float(arr.mean())
    se = float(arr.std(ddof=1) / math.sqrt(n))
    return mean, se


@dataclass
class RunResult:
    seed: int
    msre: float
    curve: list[tuple[int, float]]
    profile_rows: Optional[list[tuple]] = None


def trial_profile(log: PredictionLog, returns: ReturnSeries,
                  trial_indices: Sequence[int], before: int,
                  after: int) -> list[tuple]:
    """CS-onset-aligned slices of selected trials.

    Each row is (trial_index, offset, us, cs..., distractors..., prediction,
    return) for offsets in [-before, after], clipped to the scored region.
    Requires a log recorded with channel logging on.
    """
    if log.channels is None:
        raise ValueError("profile requires a log with channels recorded")
    n = returns.n_scored
    rows = []
    for idx in trial_indices:
        trial = log.trials[idx]
        for off in range(-before, after + 1):
            t = trial.cs_onset + off
            if t < 0 or t >= n:
                continue
            ch = log.channels[t]
            rows.append((idx, off, int(ch[log.n_cs]),
                         *(int(c) for c in ch[:log.n_cs]),
                         *(int(c) for c in ch[log.n_cs + 1:]),
                         float(log.v[t]), float(returns.g[t])))
    return rows
