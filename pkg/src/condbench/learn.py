"""Online TD learners: linear TD(lambda) over fixed representations, and
recurrent value networks trained with T-BPTT or RTRL (both TD(0)).

Every learner follows the same per-step contract: observe o_t, emit the
prediction V_t before any parameter update that uses information from t+1,
then apply the update for the transition (t-1 -> t).  ADAM is applied to the
pseudo-gradient -delta * z (or its RNN equivalent) rather than a raw
step-size, matching the tuned setup the benchmarks assume.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import _kernels as K
from .features import FeatureVector, StimulusTraces
from .envs import Trial
from .rnn import (CellParams, WindowBuffer, cell_forward, rtrl_init,
                  rtrl_propagate, rtrl_value_gradient, tbptt_gradient,
                  value_head)


@dataclass
class AdamState:
    """First/second moment state; ``apply`` updates parameters in place."""

    alpha: float
    m: np.ndarray
    v: np.ndarray
    t: int = 0
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8

    @classmethod
    def for_size(cls, n: int, alpha: float, beta1: float = 0.9,
                 beta2: float = 0.999, eps: float = 1e-8) -> "AdamState":
        return cls(alpha=alpha, m=np.zeros(n), v=np.zeros(n),
                   beta1=beta1, beta2=beta2, eps=eps)

    def apply(self, params: np.ndarray, grad: np.ndarray) -> None:
        self.t += 1
        K.adam_step(params, self.m, self.v, grad, self.t,
                    self.alpha, self.beta1, self.beta2, self.eps)


def td_error(v_t: float, v_tp1: float, us_tp1: float, gamma: float) -> float:
    """delta_t = US_{t+1} + gamma V_{t+1} - V_t."""
    return us_tp1 + gamma * v_tp1 - v_t


@dataclass
class TdLambdaState:
    """Weights and accumulating eligibility trace of the linear learner."""

    w: np.ndarray
    z: np.ndarray
    gamma: float
    lam: float

    @classmethod
    def zeros(cls, n_features: int, gamma: float, lam: float) -> "TdLambdaState":
        return cls(w=np.zeros(n_features), z=np.zeros(n_features),
                   gamma=gamma, lam=lam)


def linear_td_lambda_step(state: TdLambdaState, adam: AdamState,
                          x_cur: FeatureVector, delta: float) -> None:
    """z <- gamma*lambda*z + x_cur, then ADAM on -delta*z.  ``x_cur`` is the
    feature vector of the transition's older endpoint."""
    state.z *= state.gamma * state.lam
    x_cur.add_into(state.z)
    adam.apply(state.w, -delta * state.z)


@dataclass
class PredictionLog:
    """Per-step predictions and US values of one run, plus the trial markers
    the environment recorded.  ``channels`` is kept only when profile output
    was requested."""

    v: np.ndarray
    us: np.ndarray
    trials: list[Trial]
    n_cs: int
    n_distractors: int
    channels: Optional[np.ndarray] = None
    weight_snapshots: Optional[list] = None


def run_linear_learner(env, representation, lam: float, gamma: float,
                       adam: AdamState, steps: int,
                       log_channels: bool = False,
                       snapshot_weights: int = 0) -> PredictionLog:
    """Drive ``representation`` over ``env`` for ``steps`` steps with linear
    TD(lambda).  ``snapshot_weights`` > 0 records copies of w at the start of
    the first k steps (test instrumentation)."""
    state = TdLambdaState.zeros(representation.n_features, gamma, lam)
    v_log = np.empty(steps)
    us_log = np.empty(steps)
    ch_log = np.empty((steps, env.n_channels), dtype=np.uint8) if log_channels else None
    snaps: Optional[list] = [] if snapshot_weights > 0 else None
    x_prev: Optional[FeatureVector] = None
    v_prev = 0.0
    n_cs = env.n_cs
    for t in range(steps):
        obs = env.step()
        if snaps is not None and t < snapshot_weights:
            snaps.append(state.w.copy())
        x = representation.step(obs.channels, v_prev)
        v = x.dot(state.w)
        if t > 0:
            us_t = obs.channels[n_cs]
            delta = td_error(v_prev, v, us_t, gamma)
            linear_td_lambda_step(state, adam, x_prev, delta)
        v_log[t] = v
        us_log[t] = obs.channels[n_cs]
        if ch_log is not None:
            ch_log[t] = obs.channels
        x_prev = x
        v_prev = v
    return PredictionLog(v_log, us_log, env.trials, env.n_cs,
                         env.n_distractors, ch_log, snaps)


def _augmented_width(n_channels: int, augment: bool) -> int:
    return 2 * n_channels if augment else n_channels


def run_rnn_learner(env, params: CellParams, gamma: float, adam: AdamState,
                    steps: int, engine: str, truncation: int = 0,
                    augment: bool = False, trace_decay: float = 0.0,
                    log_channels: bool = False) -> PredictionLog:
    """Drive a recurrent value network over ``env``.

    engine="tbptt" re-unrolls the last ``truncation`` transitions from a
    stale snapshot each step (no updates until the window first fills);
    engine="rtrl" carries the influence matrix forward and applies a TD(0)
    update each step with the one-step-stale Jacobian.  ``augment`` appends
    decaying onset traces (rate ``trace_decay``) to the observation,
    doubling the input width.
    """
    n_channels = env.n_channels
    width = _augmented_width(n_channels, augment)
    if params.input_size != width:
        raise ValueError(f"cell expects input width {params.input_size}, "
                         f"environment provides {width}")
    traces = StimulusTraces(n_channels, trace_decay) if augment else None
    v_log = np.empty(steps)
    us_log = np.empty(steps)
    ch_log = np.empty((steps, n_channels), dtype=np.uint8) if log_channels else None
    n_cs = env.n_cs
    state = params.initial_state()

    if engine == "tbptt":
        if truncation < 1:
            raise ValueError("tbptt requires truncation >= 1")
        window = WindowBuffer(truncation, width, params.hidden_size,
                              lstm=(params.kind == "lstm"))
        for t in range(steps):
            obs = env.step()
            if augment:
                u = np.concatenate([obs.channels, traces.update(obs.channels)])
            else:
                u = obs.channels
            state = cell_forward(params, state, u)
            v = value_head(params, state)
            window.push(u, obs.channels[n_cs], state)
            if window.full:
                adam.apply(params.theta, tbptt_gradient(params, window, gamma))
            v_log[t] = v
            us_log[t] = obs.channels[n_cs]
            if ch_log is not None:
                ch_log[t] = obs.channels
    elif engine == "rtrl":
        J = rtrl_init(params)
        v_prev = 0.0
        for t in range(steps):
            obs = env.step()
            if augment:
                u = np.concatenate([obs.channels, traces.update(obs.channels)])
            else:
                u = obs.channels
            state_new, J_new = rtrl_propagate(params, J, state, u)
            v = value_head(params, state_new)
            if t > 0:
                delta = td_error(v_prev, v, obs.channels[n_cs], gamma)
                grad = rtrl_value_gradient(params, J, state)
                adam.apply(params.theta, -delta * grad)
            state, J = state_new, J_new
            v_prev = v
            v_log[t] = v
            us_log[t] = obs.channels[n_cs]
            if ch_log is not None:
                ch_log[t] = obs.channels
    else:
        raise ValueError(f"unknown engine: {engine!r}")

    return PredictionLog(v_log, us_log, env.trials, env.n_cs,
                         env.n_distractors, ch_log)
