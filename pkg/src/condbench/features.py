"""Fixed input representations for the linear learners.

All of them produce a :class:`FeatureVector` with a trailing bias feature
that is always 1.  The trace-based representations share
:class:`StimulusTraces`: an exponentially decaying memory y per observation
channel that is reset to 1 at a 0->1 onset of the raw channel and otherwise
multiplied by the decay rate each step.
"""

from __future__ import annotations

import numpy as np


class FeatureVector:
    """Dense or sparse feature vector.

    ``indices is None`` means ``values`` is the full dense vector of length
    ``size``; otherwise ``values[k]`` sits at position ``indices[k]`` (strictly
    increasing, everything else zero).  The bias is the last position.
    """

    __slots__ = ("size", "values", "indices")

    def __init__(self, size: int, values: np.ndarray, indices: np.ndarray | None = None):
        self.size = size
        self.values = values
        self.indices = indices

    def dot(self, w: np.ndarray) -> float:
        if self.indices is None:
            return float(np.dot(w, self.values))
        return float(np.dot(w[self.indices], self.values))

    def add_into(self, out: np.ndarray, scale: float = 1.0) -> None:
        """out += scale * x.  Sparse indices are unique, so fancy += is safe."""
        if self.indices is None:
            if scale == 1.0:
                out += self.values
            else:
                out += scale * self.values
        elif scale == 1.0:
            out[self.indices] += self.values
        else:
            out[self.indices] += scale * self.values

    def to_dense(self) -> np.ndarray:
        if self.indices is None:
            return np.array(self.values, dtype=np.float64)
        dense = np.zeros(self.size, dtype=np.float64)
        dense[self.indices] = self.values
        return dense


def presence_features(channels: np.ndarray) -> FeatureVector:
    """Raw observation channels plus the bias."""
    values = np.empty(len(channels) + 1, dtype=np.float64)
    values[:-1] = channels
    values[-1] = 1.0
    return FeatureVector(len(values), values)


class StimulusTraces:
    """Decaying onset traces, one per observation channel.

    y is set to 1 when the raw channel transitions 0->1 and decays by the
    factor ``decay`` on every other step, so k quiet steps after an onset
    leave y = decay**k.
    """

    def __init__(self, n_channels: int, decay: float):
        if not 0.0 <= decay < 1.0:
            raise ValueError("trace decay must be in [0, 1)")
        self.decay = decay
        self.y = np.zeros(n_channels, dtype=np.float64)
        self._prev = np.zeros(n_channels, dtype=np.float64)

    def update(self, channels: np.ndarray) -> np.ndarray:
        onset = (channels == 1.0) & (self._prev == 0.0)
        self.y *= self.decay
        self.y[onset] = 1.0
        np.copyto(self._prev, channels)
        return self.y


def tile_coded_features(traces: np.ndarray, n_tilings: int, n_tiles: int,
                        min_trace: float = 0.01) -> FeatureVector:
    """Per-channel 1-D tile coding of the trace values.

    Tiling i is offset by i/(n_tilings*n_tiles); a trace in [0, 1] activates
    exactly one tile per tiling, with 1.0 clamped into the top tile.  Channels
    with a trace below ``min_trace`` contribute no active tiles.
    """
    n_channels = len(traces)
    size = n_channels * n_tilings * n_tiles + 1
    live = np.nonzero(traces >= min_trace)[0]
    if len(live) == 0:
        return FeatureVector(size, np.ones(1), np.array([size - 1], dtype=np.intp))
    offsets = np.arange(n_tilings, dtype=np.float64) / (n_tilings * n_tiles)
    # (live, tilings) tile index per live channel and tiling
    idx = np.floor((traces[live, None] + offsets[None, :]) * n_tiles).astype(np.intp)
    np.clip(idx, 0, n_tiles - 1, out=idx)
    base = live[:, None] * (n_tilings * n_tiles) + np.arange(n_tilings)[None, :] * n_tiles
    indices = np.append((base + idx).ravel(), size - 1)
    return FeatureVector(size, np.ones(len(indices)), indices)


def microstimulus_features(traces: np.ndarray, n_rbfs: int,
                           sigma: float = 0.8) -> FeatureVector:
    """Radial-basis coding of the traces, x_j = y * exp(-(y - mu_j)^2 / (2 sigma^2))
    with centers mu_j = j/n_rbfs for j = 1..n_rbfs."""
    mu = np.arange(1, n_rbfs + 1, dtype=np.float64) / n_rbfs
    y = traces[:, None]
    feats = y * np.exp(-((y - mu[None, :]) ** 2) / (2.0 * sigma * sigma))
    values = np.empty(len(traces) * n_rbfs + 1, dtype=np.float64)
    values[:-1] = feats.ravel()
    values[-1] = 1.0
    return FeatureVector(len(values), values)


def _spectral_radius(a: np.ndarray) -> float:
    return float(np.abs(np.linalg.eigvals(a)).max())


class EchoState:
    """Fixed random recurrent features with value feedback.

    w_in and w_fb entries are +-input_scaling with equal probability.  w_h is
    sparse: each entry is nonzero with probability ``density``, drawn from
    Uniform(-1, 1), then the whole matrix is rescaled so its spectral radius
    equals ``spectral_radius`` (resampling in the rare case the draw has
    radius zero).  All three are frozen after construction; only the linear
    readout trained on top of the hidden state ever learns.
    """

    def __init__(self, n_inputs: int, hidden_size: int, spectral_radius: float,
                 input_scaling: float, density: float, seed: int):
        if not 0.0 < density <= 1.0:
            raise ValueError("density must be in (0, 1]")
        if spectral_radius <= 0.0:
            raise ValueError("spectral_radius must be positive")
        rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed)))
        sign = lambda shape: np.where(rng.random(shape) < 0.5, -1.0, 1.0)
        self.w_in = sign((hidden_size, n_inputs)) * input_scaling
        self.w_fb = sign(hidden_size) * input_scaling
        while True:
            mask = rng.random((hidden_size, hidden_size)) < density
            w_h = np.where(mask, rng.uniform(-1.0, 1.0, (hidden_size, hidden_size)), 0.0)
            radius = _spectral_radius(w_h)
            if radius > 1e-12:
                break
        self.w_h = w_h * (spectral_radius / radius)
        for w in (self.w_in, self.w_fb, self.w_h):
            w.setflags(write=False)
        self.hidden_size = hidden_size
        self.h = np.zeros(hidden_size, dtype=np.float64)

    def step(self, channels: np.ndarray, v_prev: float) -> np.ndarray:
        self.h = np.tanh(self.w_in @ channels + self.w_h @ self.h + self.w_fb * v_prev)
        return self.h


# Uniform stepping interface used by the linear learner: each representation
# consumes the raw channels (and the previous emitted value, which only the
# echo state uses) and yields the next feature vector.

class PresenceRep:
    def __init__(self, n_channels: int):
        self.n_features = n_channels + 1

    def step(self, channels: np.ndarray, v_prev: float) -> FeatureVector:
        return presence_features(channels)


class TileCodedTraceRep:
    def __init__(self, n_channels: int, decay: float, n_tilings: int = 2,
                 n_tiles: int = 8):
        self.traces = StimulusTraces(n_channels, decay)
        self.n_tilings = n_tilings
        self.n_tiles = n_tiles
        self.n_features = n_channels * n_tilings * n_tiles + 1

    def step(self, channels: np.ndarray, v_prev: float) -> FeatureVector:
        y = self.traces.update(channels)
        return tile_coded_features(y, self.n_tilings, self.n_tiles)


class MicrostimulusRep:
    def __init__(self, n_channels: int, decay: float, n_rbfs: int = 8,
                 sigma: float = 0.8):
        self.traces = StimulusTraces(n_channels, decay)
        self.n_rbfs = n_rbfs
        self.sigma = sigma
        self.n_features = n_channels * n_rbfs + 1

    def step(self, channels: np.ndarray, v_prev: float) -> FeatureVector:
        y = self.traces.update(channels)
        return microstimulus_features(y, self.n_rbfs, self.sigma)


class EchoStateRep:
    def __init__(self, n_channels: int, hidden_size: int, spectral_radius: float,
                 input_scaling: float, density: float, seed: int):
        self.esn = EchoState(n_channels, hidden_size, spectral_radius,
                             input_scaling, density, seed)
        self.n_features = hidden_size + 1

    def step(self, channels: np.ndarray, v_prev: float) -> FeatureVector:
        h = self.esn.step(channels, v_prev)
        values = np.empty(self.n_features, dtype=np.float64)
        values[:-1] = h
        values[-1] = 1.0
        return FeatureVector(self.n_features, values)
