"""Recurrent cells and the two online gradient engines built on them.

Parameters live in one flat float64 vector so the optimizer, the influence
matrix and the window gradients all share a single layout:

    [W_x.ravel(), W_h.ravel(), b, w_out, b_out]

Gate blocks are stacked row-wise inside W_x / W_h: LSTM rows are
[input, forget, candidate, output] and GRU rows are [update, reset,
candidate].  The value head (w_out, b_out) reads the hidden state h only.

The two engines:

* T-BPTT: a ring buffer keeps the last T+1 observations plus the hidden
  state that preceded them, exactly as it was computed online (stale, never
  recomputed).  Each step, once the buffer is full, the window is re-unrolled
  under the current parameters and the mean semi-gradient TD(0) update over
  its T transitions is returned.  No gradient flows into the snapshot.
* RTRL: the influence matrix J = d(state)/d(cell params) is advanced every
  step alongside the state; the value gradient at the previous step combines
  the retained J with the current head weights (the Jacobian is deliberately
  one step stale with respect to parameter updates).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import _kernels as K

CELL_KINDS = ("vanilla", "lstm", "gru")
_N_GATES = {"vanilla": 1, "lstm": 4, "gru": 3}


@dataclass
class CellState:
    h: np.ndarray
    c: Optional[np.ndarray] = None


class CellParams:
    """Flat parameter vector of one cell plus its linear value head."""

    def __init__(self, kind: str, input_size: int, hidden_size: int,
                 theta: np.ndarray):
        if kind not in CELL_KINDS:
            raise ValueError(f"unknown cell kind: {kind!r}")
        self.kind = kind
        self.input_size = input_size
        self.hidden_size = hidden_size
        gates = _N_GATES[kind]
        self.n_wx = gates * hidden_size * input_size
        self.n_wh = gates * hidden_size * hidden_size
        self.n_cell = self.n_wx + self.n_wh + gates * hidden_size
        self.n_params = self.n_cell + hidden_size + 1
        if theta.shape != (self.n_params,):
            raise ValueError(f"theta must have shape ({self.n_params},)")
        self.theta = theta
        self.state_size = 2 * hidden_size if kind == "lstm" else hidden_size

    @property
    def w_x(self) -> np.ndarray:
        gates = _N_GATES[self.kind]
        return self.theta[:self.n_wx].reshape(gates * self.hidden_size,
                                              self.input_size)

    @property
    def w_h(self) -> np.ndarray:
        gates = _N_GATES[self.kind]
        return self.theta[self.n_wx:self.n_wx + self.n_wh].reshape(
            gates * self.hidden_size, self.hidden_size)

    @property
    def b(self) -> np.ndarray:
        return self.theta[self.n_wx + self.n_wh:self.n_cell]

    @property
    def w_out(self) -> np.ndarray:
        return self.theta[self.n_cell:self.n_cell + self.hidden_size]

    @property
    def b_out(self) -> float:
        return float(self.theta[-1])

    def initial_state(self) -> CellState:
        h = np.zeros(self.hidden_size)
        if self.kind == "lstm":
            return CellState(h, np.zeros(self.hidden_size))
        return CellState(h)

    def copy(self) -> "CellParams":
        return CellParams(self.kind, self.input_size, self.hidden_size,
                          self.theta.copy())


def init_params(kind: str, input_size: int, hidden_size: int,
                seed: int) -> CellParams:
    """Glorot-uniform weights, zero biases (LSTM forget biases start at 1 so
    the cell state is initially retained), zero value head so V_0 = 0."""
    if kind not in CELL_KINDS:
        raise ValueError(f"unknown cell kind: {kind!r}")
    rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed)))
    gates = _N_GATES[kind]
    a_x = math.sqrt(6.0 / (input_size + hidden_size))
    a_h = math.sqrt(6.0 / (2 * hidden_size))
    w_x = rng.uniform(-a_x, a_x, (gates * hidden_size, input_size))
    w_h = rng.uniform(-a_h, a_h, (gates * hidden_size, hidden_size))
    b = np.zeros(gates * hidden_size)
    if kind == "lstm":
        b[hidden_size:2 * hidden_size] = 1.0
    head = np.zeros(hidden_size + 1)
    theta = np.concatenate([w_x.ravel(), w_h.ravel(), b, head])
    return CellParams(kind, input_size, hidden_size, theta)


def cell_forward(params: CellParams, state: CellState, u: np.ndarray) -> CellState:
    """One recurrent step; never mutates ``state``."""
    H, IN = params.hidden_size, params.input_size
    if params.kind == "vanilla":
        return CellState(K.vanilla_step(params.theta, H, IN, state.h, u))
    if params.kind == "lstm":
        h, c = K.lstm_step(params.theta, H, IN, state.h, state.c, u)
        return CellState(h, c)
    return CellState(K.gru_step(params.theta, H, IN, state.h, u))


def value_head(params: CellParams, state: CellState) -> float:
    return float(np.dot(params.w_out, state.h)) + params.b_out


class WindowBuffer:
    """Last T+1 observations plus the stale snapshot state that preceded
    them.  ``push`` stores the observation and the state the online pass
    computed after consuming it; when an entry is evicted its stored state
    becomes the new snapshot."""

    def __init__(self, truncation: int, input_size: int, hidden_size: int,
                 lstm: bool):
        if truncation < 1:
            raise ValueError("truncation must be >= 1")
        self.truncation = truncation
        self.capacity = truncation + 1
        self.inputs = np.zeros((self.capacity, input_size))
        self.us = np.zeros(self.capacity)
        self._h = np.zeros((self.capacity, hidden_size))
        self._c = np.zeros((self.capacity, hidden_size)) if lstm else None
        self.snapshot_h = np.zeros(hidden_size)
        self.snapshot_c = np.zeros(hidden_size) if lstm else None
        self.count = 0

    @property
    def full(self) -> bool:
        return self.count == self.capacity

    def push(self, u: np.ndarray, us: float, state: CellState) -> None:
        if self.full:
            self.snapshot_h[:] = self._h[0]
            if self._c is not None:
                self.snapshot_c[:] = self._c[0]
            self.inputs[:-1] = self.inputs[1:]
            self.us[:-1] = self.us[1:]
            self._h[:-1] = self._h[1:]
            if self._c is not None:
                self._c[:-1] = self._c[1:]
            k = self.capacity - 1
        else:
            k = self.count
            self.count += 1
        self.inputs[k] = u
        self.us[k] = us
        self._h[k] = state.h
        if self._c is not None:
            self._c[k] = state.c


def tbptt_gradient(params: CellParams, window: WindowBuffer,
                   gamma: float) -> np.ndarray:
    """Mean semi-gradient TD(0) update over the window's transitions.

    Returns zeros while the window is still filling (warm-up)."""
    grad = np.zeros(params.n_params)
    if not window.full:
        return grad
    H, IN = params.hidden_size, params.input_size
    if params.kind == "vanilla":
        K.vanilla_window_grad(params.theta, H, IN, window.inputs, window.us,
                              window.snapshot_h, gamma, grad)
    elif params.kind == "lstm":
        K.lstm_window_grad(params.theta, H, IN, window.inputs, window.us,
                           window.snapshot_h, window.snapshot_c, gamma, grad)
    else:
        K.gru_window_grad(params.theta, H, IN, window.inputs, window.us,
                          window.snapshot_h, gamma, grad)
    return grad


def rtrl_init(params: CellParams) -> np.ndarray:
    """Zero influence matrix, rows = state components, cols = cell params."""
    return np.zeros((params.state_size, params.n_cell))


def rtrl_propagate(params: CellParams, J: np.ndarray, state: CellState,
                   u: np.ndarray) -> tuple[CellState, np.ndarray]:
    """Advance state and influence matrix one step under current params."""
    H, IN = params.hidden_size, params.input_size
    if params.kind == "vanilla":
        h, Jn = K.vanilla_rtrl_step(params.theta, H, IN, state.h, u, J)
        return CellState(h), Jn
    if params.kind == "lstm":
        h, c, Jn = K.lstm_rtrl_step(params.theta, H, IN, state.h, state.c, u, J)
        return CellState(h, c), Jn
    h, Jn = K.gru_rtrl_step(params.theta, H, IN, state.h, u, J)
    return CellState(h), Jn


def rtrl_value_gradient(params: CellParams, J: np.ndarray,
                        state: CellState) -> np.ndarray:
    """dV/dtheta for the value at the step J and state belong to: the cell
    block reads the h-rows of J through the current head weights, the head
    block is (h, 1)."""
    H = params.hidden_size
    grad = np.empty(params.n_params)
    grad[:params.n_cell] = np.dot(params.w_out, J[:H])
    grad[params.n_cell:params.n_cell + H] = state.h
    grad[-1] = 1.0
    return grad


def warm_kernels() -> None:
    """Compile (or load from cache) every kernel with tiny inputs so worker
    processes hit a hot disk cache instead of re-JITting."""
    for kind in CELL_KINDS:
        p = init_params(kind, 2, 2, 0)
        s = p.initial_state()
        u = np.zeros(2)
        s2 = cell_forward(p, s, u)
        w = WindowBuffer(1, 2, 2, lstm=(kind == "lstm"))
        w.push(u, 0.0, s2)
        w.push(u, 0.0, s2)
        tbptt_gradient(p, w, 0.9)
        J = rtrl_init(p)
        rtrl_propagate(p, J, s, u)
    K.adam_step(np.zeros(3), np.zeros(3), np.zeros(3), np.zeros(3), 1,
                0.001, 0.9, 0.999, 1e-8)
