"""Uncontrolled prediction environments: trace conditioning and patterning.

Each environment emits one binary observation vector per call to ``step()``.
A trial is a conditioned-stimulus (CS) presentation optionally followed, one
inter-stimulus interval (ISI) later, by the unconditioned stimulus (US).
Trials are separated by an inter-trial interval (ITI) measured from US onset
to the next CS onset, so trials never overlap as long as iti_low exceeds
isi_high.  Every environment emits one sampled ITI of quiet before the first
trial.

Channel layout of an observation is [cs..., us, distractors...]; the US is
always part of the observation the learner sees.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from itertools import combinations
from typing import Optional, Sequence

import numpy as np

DEFAULT_DISTRACTOR_MEANS = tuple(range(10, 101, 10))

# Expected ISI of 10, 20 and 30 steps respectively.
ISI_PRESETS = {
    "short": (7, 13),
    "medium": (14, 26),
    "long": (20, 40),
}

# (n_cs, n_patterns, n_distractors, noise) for the patterning problems.
DIFFICULTY_PRESETS = {
    "easy": (8, 4, 5, 0.05),
    "medium": (8, 8, 10, 0.10),
    "hard": (8, 16, 20, 0.15),
}


class Observation:
    """One time step of an environment.

    ``channels`` is the float vector [cs..., us, distractors...]; ``cs``,
    ``us`` and ``distractors`` are views into it.
    """

    __slots__ = ("t", "channels", "_n_cs")

    def __init__(self, t: int, channels: np.ndarray, n_cs: int):
        self.t = t
        self.channels = channels
        self._n_cs = n_cs

    @property
    def cs(self) -> np.ndarray:
        return self.channels[: self._n_cs]

    @property
    def us(self) -> float:
        return float(self.channels[self._n_cs])

    @property
    def distractors(self) -> np.ndarray:
        return self.channels[self._n_cs + 1 :]

    def __repr__(self) -> str:
        return f"Observation(t={self.t}, channels={self.channels.tolist()})"


@dataclass
class Trial:
    """Bookkeeping for one trial, recorded at CS onset."""

    cs_onset: int
    isi: int
    us_onset: int          # scheduled onset; the ITI is anchored here
    us_occurs: bool = True
    pattern: Optional[tuple] = None
    activating: Optional[bool] = None
    flipped: Optional[bool] = None


def _check(cond: bool, rule: str) -> None:
    if not cond:
        raise ValueError(f"invalid environment config: {rule}")


@dataclass(frozen=True)
class TraceConditioningConfig:
    """Single CS, Poisson-like distractors, per-trial ISI ~ int-Uniform."""

    isi_low: int = 7
    isi_high: int = 13
    iti_low: int = 80
    iti_high: int = 120
    cs_duration: int = 4
    us_duration: int = 2
    distractor_duration: int = 4
    distractor_means: Sequence[float] = DEFAULT_DISTRACTOR_MEANS

    def validate(self) -> None:
        _check(self.isi_low >= 1, "isi_low >= 1")
        _check(self.isi_high >= self.isi_low, "isi_high >= isi_low")
        _check(self.iti_low > self.isi_high, "iti_low > isi_high")
        _check(self.iti_high >= self.iti_low, "iti_high >= iti_low")
        _check(self.cs_duration >= 1, "cs_duration >= 1")
        _check(self.us_duration >= 1, "us_duration >= 1")
        _check(self.distractor_duration >= 1, "distractor_duration >= 1")
        _check(all(m > 0 for m in self.distractor_means),
               "distractor means > 0")
        _check(self.expected_isi() >= 2, "expected ISI >= 2")

    def expected_isi(self) -> float:
        return (self.isi_low + self.isi_high) / 2.0


@dataclass(frozen=True)
class NoisyPatterningConfig:
    """n CSs with a fixed set of activation patterns and a fixed ISI.

    Half of the trials present an activation pattern; the outcome is flipped
    with probability ``noise``.  Distractor channels take i.i.d. fair-coin
    values for the duration of the CS presentation.
    """

    n_cs: int = 8
    n_patterns: int = 8
    n_distractors: int = 10
    noise: float = 0.10
    isi: int = 4
    iti_low: int = 80
    iti_high: int = 120
    cs_duration: int = 4
    us_duration: int = 2

    def validate(self) -> None:
        _check(self.n_cs >= 2, "n_cs >= 2")
        _check(self.n_cs % 2 == 0, "n_cs even (patterns are n_cs/2-hot)")
        n_hot = math.comb(self.n_cs, self.n_cs // 2)
        _check(1 <= self.n_patterns <= n_hot - 1,
               "1 <= n_patterns <= C(n_cs, n_cs/2) - 1")
        _check(self.n_distractors >= 0, "n_distractors >= 0")
        _check(0.0 <= self.noise <= 1.0, "0 <= noise <= 1")
        _check(self.isi >= 1, "isi >= 1")
        _check(self.iti_low > self.isi, "iti_low > isi")
        _check(self.iti_high >= self.iti_low, "iti_high >= iti_low")
        _check(self.cs_duration >= 1, "cs_duration >= 1")
        _check(self.us_duration >= 1, "us_duration >= 1")
        _check(self.expected_isi() >= 2, "expected ISI >= 2")

    def expected_isi(self) -> float:
        return float(self.isi)


@dataclass(frozen=True)
class TracePatterningConfig:
    """Noisy patterning with a per-trial ISI ~ int-Uniform."""

    n_cs: int = 8
    n_patterns: int = 8
    n_distractors: int = 10
    noise: float = 0.10
    isi_low: int = 7
    isi_high: int = 13
    iti_low: int = 80
    iti_high: int = 120
    cs_duration: int = 4
    us_duration: int = 2

    def validate(self) -> None:
        _check(self.n_cs >= 2, "n_cs >= 2")
        _check(self.n_cs % 2 == 0, "n_cs even (patterns are n_cs/2-hot)")
        n_hot = math.comb(self.n_cs, self.n_cs // 2)
        _check(1 <= self.n_patterns <= n_hot - 1,
               "1 <= n_patterns <= C(n_cs, n_cs/2) - 1")
        _check(self.n_distractors >= 0, "n_distractors >= 0")
        _check(0.0 <= self.noise <= 1.0, "0 <= noise <= 1")
        _check(self.isi_low >= 1, "isi_low >= 1")
        _check(self.isi_high >= self.isi_low, "isi_high >= isi_low")
        _check(self.iti_low > self.isi_high, "iti_low > isi_high")
        _check(self.iti_high >= self.iti_low, "iti_high >= iti_low")
        _check(self.cs_duration >= 1, "cs_duration >= 1")
        _check(self.us_duration >= 1, "us_duration >= 1")
        _check(self.expected_isi() >= 2, "expected ISI >= 2")

    def expected_isi(self) -> float:
        return (self.isi_low + self.isi_high) / 2.0


EnvConfig = TraceConditioningConfig | NoisyPatterningConfig | TracePatterningConfig


def discount_for(config: EnvConfig) -> float:
    """Discount rate gamma = 1 - 1/E[ISI], so the return's horizon tracks
    the CS-US gap.  Uniform(7,13) gives 0.9; a fixed ISI of 4 gives 0.75."""
    config.validate()
    return 1.0 - 1.0 / config.expected_isi()


class _EnvBase:
    """Shared stepping machinery; subclasses fill per-trial state."""

    def __init__(self, config: EnvConfig, seed: int):
        config.validate()
        self.config = config
        self.rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed)))
        self.trials: list[Trial] = []
        self._t = 0
        # One quiet ITI before the first trial.
        self._next_cs_onset = int(self.rng.integers(config.iti_low, config.iti_high + 1))
        self._cs_off = 0
        self._us_onset = -1
        self._us_off = -1

    @property
    def n_channels(self) -> int:
        return self.n_cs + 1 + self.n_distractors

    def _sample_iti(self) -> int:
        return int(self.rng.integers(self.config.iti_low, self.config.iti_high + 1))


class TraceConditioningEnv(_EnvBase):
    """Classical trace conditioning with background distractors.

    The CS turns on for ``cs_duration`` steps at each trial onset; the US
    turns on ISI steps after CS onset for ``us_duration`` steps.  Each
    distractor channel independently onsets each step with probability
    1/mean and stays active for ``distractor_duration`` steps; an onset
    while active restarts the counter.  ``distractor_onset_counts`` tallies
    those onset events (not 0->1 transitions) for diagnostics.
    """

    def __init__(self, config: TraceConditioningConfig, seed: int):
        super().__init__(config, seed)
        self.n_cs = 1
        self.n_distractors = len(config.distractor_means)
        self._onset_prob = 1.0 / np.asarray(config.distractor_means, dtype=np.float64)
        self._counters = np.zeros(self.n_distractors, dtype=np.int64)
        self.distractor_onset_counts = np.zeros(self.n_distractors, dtype=np.int64)

    def step(self) -> Observation:
        cfg = self.config
        t = self._t
        if t == self._next_cs_onset:
            isi = int(self.rng.integers(cfg.isi_low, cfg.isi_high + 1))
            self._cs_off = t + cfg.cs_duration
            self._us_onset = t + isi
            self._us_off = self._us_onset + cfg.us_duration
            self._next_cs_onset = self._us_onset + self._sample_iti()
            self.trials.append(Trial(cs_onset=t, isi=isi, us_onset=self._us_onset))

        onsets = self.rng.random(self.n_distractors) < self._onset_prob
        if onsets.any():
            self._counters[onsets] = cfg.distractor_duration
            self.distractor_onset_counts[onsets] += 1

        channels = np.zeros(self.n_channels, dtype=np.float64)
        if t < self._cs_off:
            channels[0] = 1.0
        if self._us_onset <= t < self._us_off:
            channels[1] = 1.0
        active = self._counters > 0
        channels[2:][active] = 1.0
        self._counters[active] -= 1

        self._t = t + 1
        return Observation(t, channels, self.n_cs)


def sample_activation_patterns(n_cs: int, n_patterns: int,
                               rng: np.random.Generator) -> list[tuple[int, ...]]:
    """Draw ``n_patterns`` distinct n_cs/2-hot binary patterns uniformly.

    Enumerates the pattern space when it is small enough, otherwise rejection
    samples; either way at least one n_cs/2-hot pattern is left out, so
    non-activating trials always have something to show.
    """
    n_hot = math.comb(n_cs, n_cs // 2)
    if not 1 <= n_patterns <= n_hot - 1:
        raise ValueError("invalid environment config: "
                         "1 <= n_patterns <= C(n_cs, n_cs/2) - 1")
    if n_hot <= 200_000:
        space = []
        for idx in combinations(range(n_cs), n_cs // 2):
            pat = [0] * n_cs
            for i in idx:
                pat[i] = 1
            space.append(tuple(pat))
        chosen = rng.choice(n_hot, size=n_patterns, replace=False)
        return [space[i] for i in sorted(chosen)]
    chosen_set: set[tuple[int, ...]] = set()
    chosen = []
    while len(chosen) < n_patterns:
        idx = rng.choice(n_cs, size=n_cs // 2, replace=False)
        pat = [0] * n_cs
        for i in idx:
            pat[i] = 1
        tpat = tuple(pat)
        if tpat not in chosen_set:
            chosen_set.add(tpat)
            chosen.append(tpat)
    return chosen


class _PatterningBase(_EnvBase):
    """Shared trial logic for the two patterning problems."""

    def __init__(self, config, seed: int):
        super().__init__(config, seed)
        self.n_cs = config.n_cs
        self.n_distractors = config.n_distractors
        # Pattern set is sampled once at construction and frozen.
        self.activation_patterns = sample_activation_patterns(
            config.n_cs, config.n_patterns, self.rng)
        self._activation_set = set(self.activation_patterns)
        n_hot = math.comb(config.n_cs, config.n_cs // 2)
        self._complement: Optional[list[tuple[int, ...]]] = None
        if n_hot <= 200_000:
            self._complement = [
                pat for pat in self._enumerate_half_hot(config.n_cs)
                if pat not in self._activation_set
            ]
        self._cs_values = np.zeros(self.n_cs, dtype=np.float64)
        self._d_values = np.zeros(self.n_distractors, dtype=np.float64)
        self._us_occurs = False

    @staticmethod
    def _enumerate_half_hot(n_cs: int) -> list[tuple[int, ...]]:
        out = []
        for idx in combinations(range(n_cs), n_cs // 2):
            pat = [0] * n_cs
            for i in idx:
                pat[i] = 1
            out.append(tuple(pat))
        return out

    def _sample_isi(self) -> int:
        raise NotImplementedError

    def _sample_pattern(self, activating: bool) -> tuple[int, ...]:
        if activating:
            return self.activation_patterns[int(self.rng.integers(len(self.activation_patterns)))]
        if self._complement is not None:
            return self._complement[int(self.rng.integers(len(self._complement)))]
        while True:
            idx = self.rng.choice(self.n_cs, size=self.n_cs // 2, replace=False)
            pat = [0] * self.n_cs
            for i in idx:
                pat[i] = 1
            tpat = tuple(pat)
            if tpat not in self._activation_set:
                return tpat

    def step(self) -> Observation:
        cfg = self.config
        t = self._t
        if t == self._next_cs_onset:
            activating = bool(self.rng.random() < 0.5)
            pattern = self._sample_pattern(activating)
            if self.n_distractors:
                self._d_values = self.rng.integers(
                    0, 2, self.n_distractors).astype(np.float64)
            flipped = bool(self.rng.random() < cfg.noise)
            isi = self._sample_isi()
            self._cs_values = np.asarray(pattern, dtype=np.float64)
            self._us_occurs = activating != flipped
            self._cs_off = t + cfg.cs_duration
            self._us_onset = t + isi
            self._us_off = self._us_onset + cfg.us_duration
            # The ITI is anchored at the scheduled US onset whether or not
            # the US actually fires, so trial spacing is outcome-independent.
            self._next_cs_onset = self._us_onset + self._sample_iti()
            self.trials.append(Trial(
                cs_onset=t, isi=isi, us_onset=self._us_onset,
                us_occurs=self._us_occurs, pattern=pattern,
                activating=activating, flipped=flipped))

        channels = np.zeros(self.n_channels, dtype=np.float64)
        if t < self._cs_off:
            channels[: self.n_cs] = self._cs_values
            channels[self.n_cs + 1 :] = self._d_values
        if self._us_occurs and self._us_onset <= t < self._us_off:
            channels[self.n_cs] = 1.0

        self._t = t + 1
        return Observation(t, channels, self.n_cs)


class NoisyPatterningEnv(_PatterningBase):
    """Patterning with a fixed ISI: the US onsets exactly ``isi`` steps after
    CS onset on activating trials, with the outcome flipped w.p. ``noise``."""

    def __init__(self, config: NoisyPatterningConfig, seed: int):
        super().__init__(config, seed)

    def _sample_isi(self) -> int:
        return self.config.isi


class TracePatterningEnv(_PatterningBase):
    """Patterning with a per-trial ISI ~ int-Uniform(isi_low, isi_high)."""

    def __init__(self, config: TracePatterningConfig, seed: int):
        super().__init__(config, seed)

    def _sample_isi(self) -> int:
        return int(self.rng.integers(self.config.isi_low, self.config.isi_high + 1))


def new_env(config: EnvConfig, seed: int):
    """Build the environment matching ``config`` with its own PRNG stream."""
    if isinstance(config, TraceConditioningConfig):
        return TraceConditioningEnv(config, seed)
    if isinstance(config, NoisyPatterningConfig):
        return NoisyPatterningEnv(config, seed)
    if isinstance(config, TracePatterningConfig):
        return TracePatterningEnv(config, seed)
    raise TypeError(f"unknown environment config type: {type(config).__name__}")
