"""Experiment configuration, seeding, parallel execution, sweeps, CSV output.

Configs are flat ``key = value`` text with dotted section keys (env.*,
method.*, run.*).  Parsing and serialization round-trip exactly; the digest
of the serialized form identifies a config in every output file.

Seeding: run r of a config with master seed s draws its streams from
SeedSequence((s, r, k)) with k = 0 for the environment and k = 1 for the
model (ESN construction / RNN init).  The 64-bit id reported in the ``seed``
CSV column is SeedSequence((s, r)).generate_state(1)[0].  Distinct (s, r, k)
entropy tuples give independent streams, so per-run substreams cannot
collide for any run count that fits in memory.

Runs execute in a spawn-based process pool whose workers pin BLAS to one
thread before importing numpy; results are gathered and written in run-index
order, so CSV bytes do not depend on the thread count.
"""

from __future__ import annotations

import dataclasses
import hashlib
import itertools
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, fields
from multiprocessing import get_context
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from . import _procenv
from .envs import (DIFFICULTY_PRESETS, ISI_PRESETS, EnvConfig,
                   NoisyPatterningConfig, TraceConditioningConfig,
                   TracePatterningConfig, discount_for, new_env)
from .features import (EchoStateRep, MicrostimulusRep, PresenceRep,
                       TileCodedTraceRep)
from .learn import AdamState, run_linear_learner, run_rnn_learner
from .rnn import CELL_KINDS, init_params, warm_kernels
from .evaluate import (RunResult, aggregate_runs, binned_curve,
                       compute_returns, msre, trial_profile)

TRACE_KINDS = ("trace_conditioning", "trace_patterning")
ENV_KINDS = TRACE_KINDS[:1] + ("noisy_patterning",) + TRACE_KINDS[1:]
LINEAR_KINDS = ("presence", "tile_coded_traces", "microstimulus", "esn")
METHOD_KINDS = LINEAR_KINDS + ("rnn",)


@dataclass
class EnvSection:
    kind: str = "trace_conditioning"
    isi_preset: str = ""          # short/medium/long; "" = use explicit bounds
    isi_low: int = 7
    isi_high: int = 13
    isi: int = 4                  # fixed ISI (noisy patterning only)
    iti_low: int = 80
    iti_high: int = 120
    difficulty: str = ""          # easy/medium/hard; "" = explicit fields
    n_cs: int = 8
    n_patterns: int = 8
    n_distractors: int = 10
    noise: float = 0.1
    distractor_means: tuple = ()  # () = the 10..100 default


@dataclass
class MethodSection:
    kind: str = "microstimulus"
    step_size: float = 0.001
    lam: float = 0.9              # eligibility decay; linear methods only
    n_tilings: int = 2
    n_tiles: int = 8
    n_rbfs: int = 8
    rbf_sigma: float = 0.8
    hidden_size: int = 0          # 0 = kind default (esn 100, rnn 20)
    spectral_radius: float = 0.9
    input_scaling: float = 0.1
    density: float = 0.1
    cell: str = "lstm"
    engine: str = "tbptt"
    truncation: int = 5
    augment: bool = False
    trace_decay: float = -1.0     # < 0 = 1 - 1/E[ISI]


@dataclass
class RunSection:
    steps: int = 0                # 0 = problem default (2M; 5M trace patterning)
    n_runs: int = 30
    seed: int = 0
    out_dir: str = "results"
    bin_size: int = 10000
    profile_trials: int = 0
    profile_before: int = 10
    profile_after: int = 40


@dataclass
class ExperimentConfig:
    env: EnvSection = field(default_factory=EnvSection)
    method: MethodSection = field(default_factory=MethodSection)
    run: RunSection = field(default_factory=RunSection)


_SECTIONS = {"env": EnvSection, "method": MethodSection, "run": RunSection}


def _section_fields(cls) -> dict:
    return {f.name: f for f in fields(cls)}


_FIELD_MAP = {name: _section_fields(cls) for name, cls in _SECTIONS.items()}


def _parse_scalar(text: str, typ: type, key: str):
    text = text.strip()
    try:
        if typ is int:
            return int(text)
        if typ is float:
            return float(text)
        if typ is bool:
            if text not in ("true", "false"):
                raise ValueError
            return text == "true"
        if typ is str:
            return text
        if typ is tuple:
            inner = text.strip()
            if not (inner.startswith("[") and inner.endswith("]")):
                raise ValueError
            inner = inner[1:-1].strip()
            if not inner:
                return ()
            return tuple(_parse_scalar(p, int, key) for p in inner.split(","))
    except ValueError:
        raise ValueError(f"invalid value for {key}: {text!r}") from None
    raise ValueError(f"unsupported field type for {key}")


def _format_scalar(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, tuple):
        return "[" + ", ".join(str(v) for v in value) + "]"
    if isinstance(value, float):
        return repr(value)
    return str(value)


def _split_lines(text: str) -> list[tuple[str, str]]:
    pairs = []
    for raw in text.splitlines():
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"expected 'key = value', got: {raw.strip()!r}")
        key, value = line.split("=", 1)
        pairs.append((key.strip(), value.strip()))
    return pairs


def config_set(cfg: ExperimentConfig, key: str, raw_or_value) -> None:
    """Set a dotted config key, coercing strings to the field's type."""
    parts = key.split(".", 1)
    if len(parts) != 2 or parts[0] not in _SECTIONS:
        raise ValueError(f"unknown config key: {key}")
    section, name = parts
    fmap = _FIELD_MAP[section]
    if name not in fmap:
        raise ValueError(f"unknown config key: {key}")
    typ = fmap[name].type
    typ = {"int": int, "float": float, "bool": bool, "str": str,
           "tuple": tuple}.get(typ, typ)
    if isinstance(raw_or_value, str):
        value = _parse_scalar(raw_or_value, typ, key)
    else:
        value = typ(raw_or_value) if typ in (int, float) and not isinstance(
            raw_or_value, typ) else raw_or_value
    setattr(getattr(cfg, section), name, value)


def config_get(cfg: ExperimentConfig, key: str):
    section, _, name = key.partition(".")
    return getattr(getattr(cfg, section), name)


def parse_config(text: str) -> ExperimentConfig:
    cfg = ExperimentConfig()
    for key, value in _split_lines(text):
        if key.startswith("sweep."):
            raise ValueError(f"sweep key in a run config: {key}")
        config_set(cfg, key, value)
    validate_config(cfg)
    return cfg


def serialize_config(cfg: ExperimentConfig) -> str:
    lines = []
    for section in ("env", "method", "run"):
        obj = getattr(cfg, section)
        for f in fields(obj):
            lines.append(f"{section}.{f.name} = "
                         f"{_format_scalar(getattr(obj, f.name))}")
    return "\n".join(lines) + "\n"


def config_digest(cfg: ExperimentConfig) -> str:
    return hashlib.sha256(serialize_config(cfg).encode()).hexdigest()[:12]


def validate_config(cfg: ExperimentConfig) -> None:
    if cfg.env.kind not in ENV_KINDS:
        raise ValueError(f"unknown env kind: {cfg.env.kind!r}")
    if cfg.env.isi_preset and cfg.env.isi_preset not in ISI_PRESETS:
        raise ValueError(f"unknown isi preset: {cfg.env.isi_preset!r}")
    if cfg.env.difficulty and cfg.env.difficulty not in DIFFICULTY_PRESETS:
        raise ValueError(f"unknown difficulty: {cfg.env.difficulty!r}")
    if cfg.method.kind not in METHOD_KINDS:
        raise ValueError(f"unknown method kind: {cfg.method.kind!r}")
    if cfg.method.kind == "rnn":
        if cfg.method.cell not in CELL_KINDS:
            raise ValueError(f"unknown cell: {cfg.method.cell!r}")
        if cfg.method.engine not in ("tbptt", "rtrl"):
            raise ValueError(f"unknown engine: {cfg.method.engine!r}")
    if cfg.method.step_size <= 0:
        raise ValueError("method.step_size must be positive")
    if cfg.run.n_runs < 1:
        raise ValueError("run.n_runs must be >= 1")
    build_env_config(cfg.env).validate()


def build_env_config(sec: EnvSection) -> EnvConfig:
    if sec.kind == "trace_conditioning":
        lo, hi = (ISI_PRESETS[sec.isi_preset] if sec.isi_preset
                  else (sec.isi_low, sec.isi_high))
        means = sec.distractor_means or None
        kwargs = dict(isi_low=lo, isi_high=hi, iti_low=sec.iti_low,
                      iti_high=sec.iti_high)
        if means is not None:
            kwargs["distractor_means"] = means
        return TraceConditioningConfig(**kwargs)
    if sec.difficulty:
        n_cs, n_patterns, n_distractors, noise = DIFFICULTY_PRESETS[sec.difficulty]
    else:
        n_cs, n_patterns, n_distractors, noise = (sec.n_cs, sec.n_patterns,
                                                  sec.n_distractors, sec.noise)
    common = dict(n_cs=n_cs, n_patterns=n_patterns,
                  n_distractors=n_distractors, noise=noise,
                  iti_low=sec.iti_low, iti_high=sec.iti_high)
    if sec.kind == "noisy_patterning":
        return NoisyPatterningConfig(isi=sec.isi, **common)
    lo, hi = (ISI_PRESETS[sec.isi_preset] if sec.isi_preset
              else (sec.isi_low, sec.isi_high))
    return TracePatterningConfig(isi_low=lo, isi_high=hi, **common)


def resolve_steps(cfg: ExperimentConfig) -> int:
    if cfg.run.steps > 0:
        return cfg.run.steps
    return 5_000_000 if cfg.env.kind == "trace_patterning" else 2_000_000


def resolve_hidden(m: MethodSection) -> int:
    if m.hidden_size > 0:
        return m.hidden_size
    return 100 if m.kind == "esn" else 20


def problem_label(sec: EnvSection) -> str:
    if sec.kind == "trace_conditioning":
        tag = sec.isi_preset or f"isi{sec.isi_low}_{sec.isi_high}"
        return f"trace_conditioning_{tag}"
    if sec.difficulty:
        tag = sec.difficulty
    else:
        tag = f"p{sec.n_patterns}_d{sec.n_distractors}"
    if sec.kind == "trace_patterning" and sec.isi_preset:
        tag += f"_{sec.isi_preset}"
    return f"{sec.kind}_{tag}"


def method_label(m: MethodSection) -> str:
    if m.kind == "presence":
        return "presence"
    if m.kind == "tile_coded_traces":
        return f"tile_coded_{m.n_tilings}x{m.n_tiles}"
    if m.kind == "microstimulus":
        return f"microstimulus_{m.n_rbfs}"
    if m.kind == "esn":
        return f"esn_h{resolve_hidden(m)}_r{m.spectral_radius}"
    tag = f"{m.cell}_{m.engine}"
    if m.engine == "tbptt":
        tag += f"_t{m.truncation}"
    tag += f"_h{resolve_hidden(m)}"
    if m.augment:
        tag += "_aug"
    return tag


def derive_seed(*parts: int) -> int:
    return int(np.random.SeedSequence(parts).generate_state(1, np.uint64)[0])


def _resolve_decay(m: MethodSection, env_cfg: EnvConfig) -> float:
    return m.trace_decay if m.trace_decay >= 0 else discount_for(env_cfg)


def _build_representation(m: MethodSection, env_cfg: EnvConfig,
                          n_channels: int, model_seed: int):
    if m.kind == "presence":
        return PresenceRep(n_channels)
    if m.kind == "tile_coded_traces":
        return TileCodedTraceRep(n_channels, _resolve_decay(m, env_cfg),
                                 m.n_tilings, m.n_tiles)
    if m.kind == "microstimulus":
        return MicrostimulusRep(n_channels, _resolve_decay(m, env_cfg),
                                m.n_rbfs, m.rbf_sigma)
    if m.kind == "esn":
        return EchoStateRep(n_channels, resolve_hidden(m), m.spectral_radius,
                            m.input_scaling, m.density, model_seed)
    raise ValueError(f"not a linear method: {m.kind}")


def _profile_trial_indices(log, n_scored: int, n_trials: int, before: int,
                           after: int) -> list[int]:
    """The last n_trials whose whole [-before, after] window is scored."""
    picked = []
    for idx in range(len(log.trials) - 1, -1, -1):
        onset = log.trials[idx].cs_onset
        if onset - before >= 0 and onset + after < n_scored:
            picked.append(idx)
            if len(picked) == n_trials:
                break
    return picked[::-1]


def _execute_run(config_text: str, run_index: int,
                 profile_trials: int) -> dict:
    cfg = parse_config(config_text)
    env_cfg = build_env_config(cfg.env)
    gamma = discount_for(env_cfg)
    master = cfg.run.seed
    env_seed = derive_seed(master, run_index, 0)
    model_seed = derive_seed(master, run_index, 1)
    env = new_env(env_cfg, env_seed)
    steps = resolve_steps(cfg)
    m = cfg.method
    log_channels = profile_trials > 0
    if m.kind == "rnn":
        width = 2 * env.n_channels if m.augment else env.n_channels
        params = init_params(m.cell, width, resolve_hidden(m), model_seed)
        adam = AdamState.for_size(params.n_params, m.step_size)
        log = run_rnn_learner(env, params, gamma, adam, steps, m.engine,
                              truncation=m.truncation, augment=m.augment,
                              trace_decay=_resolve_decay(m, env_cfg),
                              log_channels=log_channels)
    else:
        rep = _build_representation(m, env_cfg, env.n_channels, model_seed)
        adam = AdamState.for_size(rep.n_features, m.step_size)
        log = run_linear_learner(env, rep, m.lam, gamma, adam, steps,
                                 log_channels=log_channels)
    returns = compute_returns(log.us, gamma)
    result = {
        "seed": derive_seed(master, run_index),
        "msre": msre(log.v, returns),
        "curve": binned_curve(log.v, returns, cfg.run.bin_size),
    }
    if profile_trials > 0:
        idx = _profile_trial_indices(log, returns.n_scored, profile_trials,
                                     cfg.run.profile_before,
                                     cfg.run.profile_after)
        result["profile"] = trial_profile(log, returns, idx,
                                          cfg.run.profile_before,
                                          cfg.run.profile_after)
    return result


_warmed = False


def _ensure_warm() -> None:
    # Compile the numba kernels once in the parent so spawned workers hit
    # the on-disk cache instead of racing to compile.
    global _warmed
    if not _warmed:
        warm_kernels()
        _warmed = True


def run_many(cfg: ExperimentConfig, run_indices: Sequence[int],
             threads: Optional[int] = None,
             profile_trials: int = 0) -> list[RunResult]:
    """Execute the given run indices in a worker pool; results come back in
    the order of ``run_indices`` regardless of completion order."""
    _ensure_warm()
    text = serialize_config(cfg)
    workers = threads if threads and threads > 0 else (os.cpu_count() or 1)
    workers = min(workers, len(run_indices)) or 1
    ctx = get_context("spawn")
    with ProcessPoolExecutor(max_workers=workers, mp_context=ctx,
                             initializer=_procenv.limit_blas_threads) as pool:
        futures = [pool.submit(_execute_run, text, i, profile_trials)
                   for i in run_indices]
        payloads = [f.result() for f in futures]
    return [RunResult(seed=p["seed"], msre=p["msre"], curve=p["curve"],
                      profile_rows=p.get("profile")) for p in payloads]


def _write_csv(path: Path, header: list[str], rows: list[list],
               append: bool) -> None:
    exists = append and path.exists() and path.stat().st_size > 0
    with open(path, "a" if append else "w", encoding="utf-8", newline="") as f:
        if not exists:
            f.write(",".join(header) + "\n")
        for row in rows:
            f.write(",".join(_format_scalar(v) if not isinstance(v, str)
                             else v for v in row) + "\n")


def _profile_header(env_cfg: EnvConfig) -> list[str]:
    tmp = new_env(env_cfg, 0)
    cs = [f"cs{i}" for i in range(tmp.n_cs)]
    ds = [f"d{i}" for i in range(tmp.n_distractors)]
    return ["config_digest", "seed", "trial", "offset", "us", *cs, *ds,
            "prediction", "return"]


def write_results(cfg: ExperimentConfig, results: list[RunResult],
                  append: bool = False) -> Path:
    """Write runs.csv / curves.csv (and profiles.csv when recorded) under
    the config's output directory; returns that directory."""
    out = Path(cfg.run.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    digest = config_digest(cfg)
    problem = problem_label(cfg.env)
    method = method_label(cfg.method)
    steps = resolve_steps(cfg)
    run_rows = [[digest, problem, method, r.seed, steps, r.msre]
                for r in results]
    _write_csv(out / "runs.csv",
               ["config_digest", "problem", "method", "seed", "steps", "msre"],
               run_rows, append)
    curve_rows = [[digest, r.seed, start, value]
                  for r in results for start, value in r.curve]
    _write_csv(out / "curves.csv",
               ["config_digest", "seed", "bin_start", "bin_msre"],
               curve_rows, append)
    if any(r.profile_rows is not None for r in results):
        prof_rows = [[digest, r.seed, *row]
                     for r in results for row in (r.profile_rows or [])]
        _write_csv(out / "profiles.csv",
                   _profile_header(build_env_config(cfg.env)),
                   prof_rows, append)
    return out


def run_experiment(cfg: ExperimentConfig, threads: Optional[int] = None,
                   append: bool = False) -> list[RunResult]:
    validate_config(cfg)
    results = run_many(cfg, range(cfg.run.n_runs), threads,
                       profile_trials=cfg.run.profile_trials)
    write_results(cfg, results, append)
    return results


@dataclass
class SweepSpec:
    base: ExperimentConfig
    grid: dict[str, list]
    selection_runs: int = 5
    final_runs: int = 30


def parse_sweep(text: str) -> SweepSpec:
    base = ExperimentConfig()
    grid: dict[str, list] = {}
    selection_runs, final_runs = 5, 30
    for key, value in _split_lines(text):
        if key == "sweep.selection_runs":
            selection_runs = _parse_scalar(value, int, key)
        elif key == "sweep.final_runs":
            final_runs = _parse_scalar(value, int, key)
        elif key.startswith("sweep."):
            target = key[len("sweep."):]
            section, _, name = target.partition(".")
            if section not in _SECTIONS or name not in _FIELD_MAP.get(section, {}):
                raise ValueError(f"unknown swept key: {target}")
            typ = _FIELD_MAP[section][name].type
            typ = {"int": int, "float": float, "bool": bool,
                   "str": str}.get(typ, typ)
            inner = value.strip()
            if not (inner.startswith("[") and inner.endswith("]")):
                raise ValueError(f"swept values must be a list: {key}")
            items = [p.strip() for p in inner[1:-1].split(",") if p.strip()]
            if not items:
                raise ValueError(f"empty sweep list: {key}")
            grid[target] = [_parse_scalar(p, typ, key) for p in items]
        else:
            config_set(base, key, value)
    if not grid:
        raise ValueError("sweep file defines no swept keys")
    if selection_runs < 2 or final_runs < 2:
        raise ValueError("selection_runs and final_runs must be >= 2")
    validate_config(base)
    return SweepSpec(base=base, grid=grid, selection_runs=selection_runs,
                     final_runs=final_runs)


def _apply_overrides(base: ExperimentConfig, keys: Sequence[str],
                     values: Sequence) -> ExperimentConfig:
    cfg = dataclasses.replace(
        base, env=dataclasses.replace(base.env),
        method=dataclasses.replace(base.method),
        run=dataclasses.replace(base.run))
    for key, value in zip(keys, values):
        config_set(cfg, key, value)
    return cfg


def sweep(spec: SweepSpec, threads: Optional[int] = None
          ) -> tuple[ExperimentConfig, list[RunResult]]:
    """Two-phase sweep: evaluate every grid point with selection runs, pick
    the argmin of mean MSRE (ties broken by the lexicographically smallest
    value tuple in sorted key order), then rerun the winner with final runs
    on fresh run indices (selection_runs .. selection_runs+final_runs-1)."""
    keys = sorted(spec.grid)
    out = Path(spec.base.run.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    table = []
    best = None
    for combo in itertools.product(*(spec.grid[k] for k in keys)):
        cfg = _apply_overrides(spec.base, keys, combo)
        validate_config(cfg)
        results = run_many(cfg, range(spec.selection_runs), threads)
        scores = [r.msre for r in results]
        mean, se = aggregate_runs(scores)
        table.append((combo, mean, se))
        if best is None or (mean, combo) < (best[1], best[0]):
            best = (combo, mean)
    _write_csv(out / "sweep.csv", [*keys, "mean_msre", "se"],
               [[*combo, mean, se] for combo, mean, se in table],
               append=False)
    winner = _apply_overrides(spec.base, keys, best[0])
    final = run_many(winner, range(spec.selection_runs,
                                   spec.selection_runs + spec.final_runs),
                     threads, profile_trials=winner.run.profile_trials)
    write_results(winner, final, append=False)
    return winner, final


def profile_run(cfg: ExperimentConfig, run_index: int, n_trials: int,
                threads: Optional[int] = None) -> list[RunResult]:
    """Re-execute one run with channel logging and write profiles.csv."""
    validate_config(cfg)
    if n_trials < 1:
        raise ValueError("profile needs at least one trial")
    results = run_many(cfg, [run_index], threads, profile_trials=n_trials)
    out = Path(cfg.run.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    digest = config_digest(cfg)
    rows = [[digest, r.seed, *row]
            for r in results for row in (r.profile_rows or [])]
    _write_csv(out / "profiles.csv", _profile_header(build_env_config(cfg.env)),
               rows, append=False)
    return results


def aggregate_dir(dir_path: str) -> list[tuple[str, str, str, int, float, float]]:
    """Group runs.csv by config and return (digest, problem, method, n,
    mean, se) tuples in first-seen order.  SE is NaN for singleton groups."""
    import csv

    path = Path(dir_path) / "runs.csv"
    if not path.exists():
        raise FileNotFoundError(f"no runs.csv in {dir_path}")
    groups: dict[tuple[str, str, str], list[float]] = {}
    with open(path, encoding="utf-8", newline="") as f:
        for row in csv.DictReader(f):
            key = (row["config_digest"], row["problem"], row["method"])
            groups.setdefault(key, []).append(float(row["msre"]))
    out = []
    for (digest, problem, method), scores in groups.items():
        if len(scores) >= 2:
            mean, se = aggregate_runs(scores)
        else:
            mean, se = scores[0], float("nan")
        out.append((digest, problem, method, len(scores), mean, se))
    return out


def apply_scale(cfg: ExperimentConfig, scale: float) -> None:
    """Shrink (or grow) steps and run counts in place; keeps n_runs >= 2
    and steps >= 1000 so aggregates stay well defined."""
    if scale == 1.0:
        return
    if scale <= 0:
        raise ValueError("--scale must be positive")
    cfg.run.steps = max(1000, round(resolve_steps(cfg) * scale))
    cfg.run.n_runs = max(2, round(cfg.run.n_runs * scale))


def apply_sweep_scale(spec: SweepSpec, scale: float) -> None:
    if scale == 1.0:
        return
    apply_scale(spec.base, scale)
    spec.selection_runs = max(2, round(spec.selection_runs * scale))
    spec.final_runs = max(2, round(spec.final_runs * scale))
