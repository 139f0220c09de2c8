"""Environment tests: trial structure, timing distributions, determinism."""

import math

import numpy as np
import pytest

from condbench.envs import (DEFAULT_DISTRACTOR_MEANS, DIFFICULTY_PRESETS,
                            ISI_PRESETS, NoisyPatterningConfig,
                            NoisyPatterningEnv, TraceConditioningConfig,
                            TraceConditioningEnv, TracePatterningConfig,
                            TracePatterningEnv, discount_for, new_env,
                            sample_activation_patterns)


def collect(env, n):
    return np.stack([env.step().channels for _ in range(n)])


# ---------------------------------------------------------------- construction

def test_invalid_patterning_k_too_large():
    # C(4,2)=6 patterns exist; all six would leave none non-activating
    with pytest.raises(ValueError, match="n_patterns"):
        new_env(NoisyPatterningConfig(n_cs=4, n_patterns=6), seed=0)


def test_invalid_isi_bounds():
    with pytest.raises(ValueError, match="isi_high >= isi_low"):
        new_env(TraceConditioningConfig(isi_low=9, isi_high=7), seed=0)
    with pytest.raises(ValueError, match="isi_low >= 1"):
        new_env(TraceConditioningConfig(isi_low=0, isi_high=7), seed=0)


def test_trials_must_not_overlap():
    with pytest.raises(ValueError, match="iti_low > isi_high"):
        new_env(TraceConditioningConfig(isi_low=7, isi_high=90), seed=0)


def test_odd_cs_count_rejected():
    with pytest.raises(ValueError, match="even"):
        new_env(NoisyPatterningConfig(n_cs=5, n_patterns=2), seed=0)


def test_presets():
    assert ISI_PRESETS["short"] == (7, 13)
    assert ISI_PRESETS["medium"] == (14, 26)
    assert ISI_PRESETS["long"] == (20, 40)
    assert DIFFICULTY_PRESETS["medium"] == (8, 8, 10, 0.10)


# ---------------------------------------------------------------- determinism

@pytest.mark.parametrize("config", [
    TraceConditioningConfig(),
    NoisyPatterningConfig(),
    TracePatterningConfig(),
])
def test_equal_seeds_equal_streams(config):
    a = new_env(config, seed=11)
    b = new_env(config, seed=11)
    assert np.array_equal(collect(a, 10_000), collect(b, 10_000))


def test_different_seeds_differ():
    cfg = TraceConditioningConfig()
    a = collect(new_env(cfg, seed=1), 5000)
    b = collect(new_env(cfg, seed=2), 5000)
    assert not np.array_equal(a, b)


# ---------------------------------------------------------------- observations

def test_observation_fields_and_binary_channels():
    env = new_env(TracePatterningConfig(), seed=3)
    for t in range(2000):
        obs = env.step()
        assert obs.t == t
        assert len(obs.cs) == 8 and len(obs.distractors) == 10
        assert obs.channels.shape == (env.n_channels,)
        assert set(np.unique(obs.channels)) <= {0.0, 1.0}
        assert obs.us in (0.0, 1.0)


def test_initial_quiet_period():
    """One ITI-length silence precedes the first trial."""
    for seed in range(5):
        env = new_env(TraceConditioningConfig(), seed=seed)
        obs = collect(env, 200)
        first = env.trials[0].cs_onset
        assert 80 <= first <= 120
        assert not obs[:first, 0].any()
        assert not obs[:first, 1].any()


# ------------------------------------------------------- trace conditioning

class TestTraceConditioningStructure:
    """Scan 1e5 generated steps against the trial markers (timing bounds,
    CS/US durations, ISI in [low, high], ITI in [80, 120])."""

    STEPS = 125_000

    @pytest.fixture(scope="class")
    @staticmethod
    def rollout():
        cfg = TraceConditioningConfig()
        env = new_env(cfg, seed=401)
        obs = collect(env, TestTraceConditioningStructure.STEPS)
        return cfg, env, obs

    def test_trial_timing_bounds(self, rollout):
        cfg, env, _ = rollout
        trials = env.trials
        assert len(trials) > 800
        for tr in trials:
            assert cfg.isi_low <= tr.us_onset - tr.cs_onset <= cfg.isi_high
            assert tr.isi == tr.us_onset - tr.cs_onset
        for prev, nxt in zip(trials, trials[1:]):
            assert cfg.iti_low <= nxt.cs_onset - prev.us_onset <= cfg.iti_high

    def test_cs_and_us_episodes(self, rollout):
        cfg, env, obs = rollout
        cs, us = obs[:, 0], obs[:, 1]
        for tr in env.trials:
            if tr.cs_onset + cfg.cs_duration > self.STEPS:
                break
            assert cs[tr.cs_onset - 1] == 0
            assert cs[tr.cs_onset:tr.cs_onset + cfg.cs_duration].all()
            assert cs[tr.cs_onset + cfg.cs_duration] == 0
            if tr.us_onset + cfg.us_duration > self.STEPS:
                break
            assert us[tr.us_onset - 1] == 0
            assert us[tr.us_onset:tr.us_onset + cfg.us_duration].all()
            assert us[tr.us_onset + cfg.us_duration] == 0

    def test_isi_mean_within_3_se(self, rollout):
        cfg, env, _ = rollout
        isis = np.array([tr.isi for tr in env.trials])
        assert len(isis) >= 1000
        # integer-uniform(7,13): mean 10, var ((b-a+1)^2 - 1)/12 = 4
        se = 2.0 / math.sqrt(len(isis))
        assert abs(isis.mean() - 10.0) < 3 * se

    def test_iti_mean_within_3_se(self, rollout):
        _, env, _ = rollout
        trials = env.trials
        itis = np.array([n.cs_onset - p.us_onset
                         for p, n in zip(trials, trials[1:])])
        se = math.sqrt((41 ** 2 - 1) / 12) / math.sqrt(len(itis))
        assert abs(itis.mean() - 100.0) < 3 * se


def test_distractor_onset_frequency():
    """Each distractor's onset rate over 1e6 steps stays within 3 SE of
    1/mean (onsets counted as Bernoulli events, restarts included)."""
    cfg = TraceConditioningConfig()
    env = new_env(cfg, seed=99)
    n = 1_000_000
    for _ in range(n):
        env.step()
    assert env.distractor_onset_counts.shape == (len(DEFAULT_DISTRACTOR_MEANS),)
    for j, mean in enumerate(DEFAULT_DISTRACTOR_MEANS):
        p = 1.0 / mean
        se = math.sqrt(p * (1 - p) / n)
        assert abs(env.distractor_onset_counts[j] / n - p) < 3 * se, f"channel {j}"


def test_distractor_duration_runs():
    """With a restartable 4-step counter, every active episode lasts >= 4
    steps and a fresh onset is visible as a 0->1 transition."""
    cfg = TraceConditioningConfig(distractor_means=(25.0,))
    env = new_env(cfg, seed=5)
    d = collect(env, 50_000)[:, 2]
    padded = np.concatenate([[0.0], d, [0.0]])
    starts = np.flatnonzero(np.diff(padded) == 1)
    ends = np.flatnonzero(np.diff(padded) == -1)
    lengths = ends - starts
    assert (lengths >= cfg.distractor_duration).all()
    assert lengths.max() > cfg.distractor_duration  # restarts occurred


# ------------------------------------------------------------- patterning

def test_sample_activation_patterns_basic():
    rng = np.random.Generator(np.random.PCG64(0))
    pats = sample_activation_patterns(8, 8, rng)
    assert len(set(pats)) == 8
    for p in pats:
        assert sum(p) == 4 and set(p) <= {0, 1}

    one = sample_activation_patterns(2, 1, rng)
    assert one[0] in {(1, 0), (0, 1)}

    five = sample_activation_patterns(4, 5, rng)
    assert len(set(five)) == 5
    assert all(sum(p) == 2 for p in five)

    with pytest.raises(ValueError):
        sample_activation_patterns(4, 6, rng)


class TestPatterningTrials:
    @pytest.fixture(scope="class")
    @staticmethod
    def rollout():
        # short ITI packs ~1e4 trials into a manageable step budget
        cfg = NoisyPatterningConfig(iti_low=6, iti_high=10)
        env = new_env(cfg, seed=17)
        obs = collect(env, 160_000)
        return cfg, env, obs

    def test_half_of_trials_activate(self, rollout):
        _, env, _ = rollout
        flags = np.array([tr.activating for tr in env.trials])
        assert len(flags) >= 10_000
        se = 0.5 / math.sqrt(len(flags))
        assert abs(flags.mean() - 0.5) < 3 * se

    def test_flip_fraction_matches_noise(self, rollout):
        cfg, env, _ = rollout
        flips = np.array([tr.flipped for tr in env.trials])
        se = math.sqrt(cfg.noise * (1 - cfg.noise) / len(flips))
        assert abs(flips.mean() - cfg.noise) < 3 * se

    def test_us_is_activating_xor_flip(self, rollout):
        cfg, env, obs = rollout
        us = obs[:, cfg.n_cs]
        for tr in env.trials:
            if tr.us_onset + cfg.us_duration > len(obs):
                break
            expect = tr.activating != tr.flipped
            assert tr.us_occurs == expect
            window = us[tr.us_onset:tr.us_onset + cfg.us_duration]
            assert window.all() if expect else not window.any()
            assert tr.us_onset - tr.cs_onset == cfg.isi

    def test_cs_presentation_is_half_hot(self, rollout):
        cfg, env, obs = rollout
        for tr in env.trials[:500]:
            stop = tr.cs_onset + cfg.cs_duration
            if stop > len(obs):
                break
            for t in range(tr.cs_onset, stop):
                assert obs[t, :cfg.n_cs].sum() == cfg.n_cs // 2
                assert np.array_equal(obs[t, :cfg.n_cs], tr.pattern)

    def test_activating_patterns_frozen_and_used(self, rollout):
        _, env, _ = rollout
        pats = {tuple(p) for p in env.activation_patterns}
        assert len(pats) == 8
        for tr in env.trials[:2000]:
            inside = tuple(tr.pattern) in pats
            assert inside == tr.activating

    def test_distractor_coins_fair(self, rollout):
        cfg, env, obs = rollout
        onsets = [tr.cs_onset for tr in env.trials if tr.cs_onset < len(obs)]
        vals = obs[onsets][:, cfg.n_cs + 1:]
        se = 0.5 / math.sqrt(vals.size)
        assert abs(vals.mean() - 0.5) < 3 * se


def test_trace_patterning_isi_varies():
    cfg = TracePatterningConfig(isi_low=7, isi_high=13, iti_low=20, iti_high=30)
    env = new_env(cfg, seed=23)
    collect(env, 60_000)
    isis = np.array([tr.isi for tr in env.trials])
    assert set(np.unique(isis)) <= set(range(7, 14))
    assert len(np.unique(isis)) >= 5
    se = 2.0 / math.sqrt(len(isis))
    assert abs(isis.mean() - 10.0) < 3 * se


def test_quiet_between_trials_patterning():
    cfg = NoisyPatterningConfig()
    env = new_env(cfg, seed=31)
    obs = collect(env, 20_000)
    cs_any = obs[:, :cfg.n_cs].any(axis=1)
    for prev, nxt in zip(env.trials, env.trials[1:]):
        stop = prev.cs_onset + cfg.cs_duration
        if nxt.cs_onset >= len(obs):
            break
        assert not cs_any[stop:nxt.cs_onset].any()


# ---------------------------------------------------------------- discounting

def test_discount_values():
    assert discount_for(TraceConditioningConfig(isi_low=7, isi_high=13)) == pytest.approx(0.9)
    assert discount_for(NoisyPatterningConfig(isi=4)) == pytest.approx(0.75)
    assert discount_for(TraceConditioningConfig(isi_low=20, isi_high=40)) == pytest.approx(1 - 1 / 30)
    assert discount_for(TracePatterningConfig(isi_low=14, isi_high=26)) == pytest.approx(0.95)
