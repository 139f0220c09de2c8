"""Independent oracles used by the test suite.

Everything here is deliberately written from scratch in plain numpy, without
calling into the package's compiled kernels, so the tests compare two
implementations of the same math rather than one implementation with itself.
"""

from __future__ import annotations

import numpy as np

from condbench.rnn import CellParams


def forward_returns(us: np.ndarray, gamma: float) -> np.ndarray:
    """Brute-force discounted forward sums: G_t = sum_k gamma^k us[t+1+k],
    with the sequence treated as all-zero past its end."""
    n = len(us)
    powers = gamma ** np.arange(n, dtype=np.float64)
    us = np.asarray(us, dtype=np.float64)
    g = np.empty(n)
    for t in range(n):
        tail = us[t + 1:]
        g[t] = float(np.dot(tail, powers[:len(tail)]))
    return g


def _sigmoid(x: np.ndarray) -> np.ndarray:
    return 1.0 / (1.0 + np.exp(-x))


def rollout_values(params: CellParams, inputs: np.ndarray,
                   h0: np.ndarray | None = None,
                   c0: np.ndarray | None = None) -> np.ndarray:
    """Value predictions along a rollout from (h0, c0), plain numpy."""
    H = params.hidden_size
    w_x, w_h, b = params.w_x, params.w_h, params.b
    w_out, b_out = params.w_out, params.b_out
    h = np.zeros(H) if h0 is None else h0.copy()
    c = np.zeros(H) if c0 is None else c0.copy()
    values = np.empty(len(inputs))
    for t, u in enumerate(inputs):
        if params.kind == "vanilla":
            h = np.tanh(w_x @ u + w_h @ h + b)
        elif params.kind == "lstm":
            a = w_x @ u + w_h @ h + b
            i = _sigmoid(a[:H])
            f = _sigmoid(a[H:2 * H])
            g = np.tanh(a[2 * H:3 * H])
            o = _sigmoid(a[3 * H:])
            c = f * c + i * g
            h = o * np.tanh(c)
        else:
            ax = w_x @ u + b
            azr = ax[:2 * H] + w_h[:2 * H] @ h
            z = _sigmoid(azr[:H])
            r = _sigmoid(azr[H:])
            n = np.tanh(ax[2 * H:] + w_h[2 * H:] @ (r * h))
            h = (1.0 - z) * h + z * n
        values[t] = w_out @ h + b_out
    return values


def fd_window_gradient(params: CellParams, inputs: np.ndarray,
                       us: np.ndarray, gamma: float,
                       h0: np.ndarray | None = None,
                       c0: np.ndarray | None = None,
                       step: float = 1e-4) -> np.ndarray:
    """Central finite differences of the frozen-target window objective

        L(theta) = 1/(2T) sum_t (V_t(theta) - target_t)^2

    with target_t = us[t+1] + gamma * V_{t+1}(theta_0) held at the base
    parameters, matching the semi-gradient convention."""
    T = len(inputs) - 1
    v0 = rollout_values(params, inputs, h0, c0)
    targets = np.asarray(us, dtype=np.float64)[1:] + gamma * v0[1:]

    def objective(theta: np.ndarray) -> float:
        p = CellParams(params.kind, params.input_size, params.hidden_size, theta)
        v = rollout_values(p, inputs, h0, c0)
        return float(0.5 / T * np.sum((v[:T] - targets) ** 2))

    theta = params.theta.copy()
    grad = np.empty(len(theta))
    for j in range(len(theta)):
        orig = theta[j]
        theta[j] = orig + step
        hi = objective(theta)
        theta[j] = orig - step
        lo = objective(theta)
        theta[j] = orig
        grad[j] = (hi - lo) / (2.0 * step)
    return grad


def fd_value_gradient(params: CellParams, inputs: np.ndarray,
                      h0: np.ndarray | None = None,
                      c0: np.ndarray | None = None,
                      step: float = 1e-5) -> np.ndarray:
    """Central finite differences of the final value V_L(theta)."""
    def value(theta: np.ndarray) -> float:
        p = CellParams(params.kind, params.input_size, params.hidden_size, theta)
        return float(rollout_values(p, inputs, h0, c0)[-1])

    theta = params.theta.copy()
    grad = np.empty(len(theta))
    for j in range(len(theta)):
        orig = theta[j]
        theta[j] = orig + step
        hi = value(theta)
        theta[j] = orig - step
        lo = value(theta)
        theta[j] = orig
        grad[j] = (hi - lo) / (2.0 * step)
    return grad


def bptt_value_gradient(params: CellParams, inputs: np.ndarray,
                        h0: np.ndarray | None = None,
                        c0: np.ndarray | None = None) -> np.ndarray:
    """Exact dV_L/dtheta by reverse accumulation through the whole rollout."""
    H, IN = params.hidden_size, params.input_size
    w_x, w_h, b = params.w_x, params.w_h, params.b
    w_out = params.w_out
    L = len(inputs)
    h = np.zeros(H) if h0 is None else h0.copy()
    c = np.zeros(H) if c0 is None else c0.copy()
    hs_prev, cs_prev, cache = [], [], []
    for u in inputs:
        hs_prev.append(h.copy())
        cs_prev.append(c.copy())
        if params.kind == "vanilla":
            h = np.tanh(w_x @ u + w_h @ h + b)
            cache.append((h.copy(),))
        elif params.kind == "lstm":
            a = w_x @ u + w_h @ h + b
            i = _sigmoid(a[:H])
            f = _sigmoid(a[H:2 * H])
            g = np.tanh(a[2 * H:3 * H])
            o = _sigmoid(a[3 * H:])
            c = f * c + i * g
            tc = np.tanh(c)
            h = o * tc
            cache.append((i, f, g, o, tc))
        else:
            ax = w_x @ u + b
            azr = ax[:2 * H] + w_h[:2 * H] @ h
            z = _sigmoid(azr[:H])
            r = _sigmoid(azr[H:])
            rh = r * h
            n = np.tanh(ax[2 * H:] + w_h[2 * H:] @ rh)
            h = (1.0 - z) * h + z * n
            cache.append((z, r, rh, n))

    g_wx = np.zeros_like(w_x)
    g_wh = np.zeros_like(w_h)
    g_b = np.zeros_like(b)
    grad = np.zeros(params.n_params)
    grad[params.n_cell:params.n_cell + H] = h
    grad[-1] = 1.0
    dh = w_out.copy()
    dc = np.zeros(H)
    for t in range(L - 1, -1, -1):
        u = inputs[t]
        hp, cp = hs_prev[t], cs_prev[t]
        if params.kind == "vanilla":
            (ht,) = cache[t]
            da = dh * (1.0 - ht * ht)
            g_wx += np.outer(da, u)
            g_wh += np.outer(da, hp)
            g_b += da
            dh = da @ w_h
        elif params.kind == "lstm":
            i, f, g, o, tc = cache[t]
            do = dh * tc
            dc = dc + dh * o * (1.0 - tc * tc)
            da = np.concatenate([
                dc * g * i * (1.0 - i),
                dc * cp * f * (1.0 - f),
                dc * i * (1.0 - g * g),
                do * o * (1.0 - o),
            ])
            g_wx += np.outer(da, u)
            g_wh += np.outer(da, hp)
            g_b += da
            dh = da @ w_h
            dc = dc * f
        else:
            z, r, rh, n = cache[t]
            dz = dh * (n - hp)
            dn = dh * z
            dhp = dh * (1.0 - z)
            dan = dn * (1.0 - n * n)
            drh = dan @ w_h[2 * H:]
            dr = drh * hp
            dhp = dhp + drh * r
            daz = dz * z * (1.0 - z)
            dar = dr * r * (1.0 - r)
            g_wx[:H] += np.outer(daz, u)
            g_wx[H:2 * H] += np.outer(dar, u)
            g_wx[2 * H:] += np.outer(dan, u)
            g_wh[:H] += np.outer(daz, hp)
            g_wh[H:2 * H] += np.outer(dar, hp)
            g_wh[2 * H:] += np.outer(dan, rh)
            g_b += np.concatenate([daz, dar, dan])
            dh = dhp + daz @ w_h[:H] + dar @ w_h[H:2 * H]
    grad[:params.n_wx] = g_wx.ravel()
    grad[params.n_wx:params.n_wx + params.n_wh] = g_wh.ravel()
    grad[params.n_wx + params.n_wh:params.n_cell] = g_b
    return grad


def power_radius(a: np.ndarray, iters: int = 5000, burn: int = 1000,
                 seed: int = 0) -> float:
    """Spectral radius estimate from the asymptotic growth rate of repeated
    multiplication; the log-growth average washes out the oscillation a
    complex dominant pair induces."""
    rng = np.random.Generator(np.random.PCG64(seed))
    v = rng.normal(size=a.shape[0])
    v /= np.linalg.norm(v)
    acc = 0.0
    for k in range(iters):
        w = a @ v
        nv = float(np.linalg.norm(w))
        if nv == 0.0:
            return 0.0
        v = w / nv
        if k >= burn:
            acc += np.log(nv)
    return float(np.exp(acc / (iters - burn)))


def relative_error(got: np.ndarray, want: np.ndarray) -> float:
    denom = max(float(np.linalg.norm(want)), 1e-12)
    return float(np.linalg.norm(got - want)) / denom
