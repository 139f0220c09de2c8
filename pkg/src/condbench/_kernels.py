"""Compiled inner loops for the recurrent learners.

Everything here operates on the flat parameter vector of a cell:

    [W_x.ravel(), W_h.ravel(), b, w_out, b_out]

with gate blocks stacked row-wise inside W_x / W_h (LSTM order i, f, g, o;
GRU order z, r, n).  The window-gradient kernels recompute the forward pass
over the buffered observations under the current parameters, starting from
the stale snapshot state, and return the mean semi-gradient TD(0) update
over the window's transitions; targets are treated as constants and no
gradient flows into the snapshot.  The RTRL kernels advance the influence
matrix J = d(state)/d(cell params) one step: J' = D_state @ J + D_params.

All kernels are float64 and deterministic; keep ``fastmath`` off so results
are reproducible bit-for-bit across runs on the same build.
"""

import numpy as np
from numba import njit


# ---------------------------------------------------------------------------
# single cell steps

@njit(cache=True)
def vanilla_step(theta, H, IN, h, u):
    nwx = H * IN
    Wx = theta[:nwx].reshape(H, IN)
    Wh = theta[nwx:nwx + H * H].reshape(H, H)
    b = theta[nwx + H * H:nwx + H * H + H]
    a = np.dot(Wx, u) + np.dot(Wh, h) + b
    return np.tanh(a)


@njit(cache=True)
def lstm_step(theta, H, IN, h, c, u):
    G = 4 * H
    nwx = G * IN
    Wx = theta[:nwx].reshape(G, IN)
    Wh = theta[nwx:nwx + G * H].reshape(G, H)
    b = theta[nwx + G * H:nwx + G * H + G]
    a = np.dot(Wx, u) + np.dot(Wh, h) + b
    i = 1.0 / (1.0 + np.exp(-a[:H]))
    f = 1.0 / (1.0 + np.exp(-a[H:2 * H]))
    g = np.tanh(a[2 * H:3 * H])
    o = 1.0 / (1.0 + np.exp(-a[3 * H:]))
    cn = f * c + i * g
    hn = o * np.tanh(cn)
    return hn, cn


@njit(cache=True)
def gru_step(theta, H, IN, h, u):
    G = 3 * H
    nwx = G * IN
    Wx = theta[:nwx].reshape(G, IN)
    Wh = theta[nwx:nwx + G * H].reshape(G, H)
    b = theta[nwx + G * H:nwx + G * H + G]
    ax = np.dot(Wx, u) + b
    azr = ax[:2 * H] + np.dot(Wh[:2 * H], h)
    z = 1.0 / (1.0 + np.exp(-azr[:H]))
    r = 1.0 / (1.0 + np.exp(-azr[H:]))
    an = ax[2 * H:] + np.dot(Wh[2 * H:], r * h)
    n = np.tanh(an)
    return (1.0 - z) * h + z * n


# ---------------------------------------------------------------------------
# truncated-window gradients
#
# U holds the T+1 buffered inputs oldest-first, usv the matching raw US
# values.  For window transitions t = 0..T-1 the TD error is
# delta_t = usv[t+1] + gamma*V[t+1] - V[t] and the returned gradient is
# g = -(1/T) * sum_t delta_t * dV_t/dtheta, written into ``grad``.

@njit(cache=True)
def vanilla_window_grad(theta, H, IN, U, usv, h0, gamma, grad):
    T1 = U.shape[0]
    T = T1 - 1
    nwx = H * IN
    nwh = H * H
    ncell = nwx + nwh + H
    Wx = theta[:nwx].reshape(H, IN)
    Wh = theta[nwx:nwx + nwh].reshape(H, H)
    b = theta[nwx + nwh:ncell]
    w_out = theta[ncell:ncell + H]
    b_out = theta[ncell + H]

    Hprev = np.empty((T1, H))
    Hs = np.empty((T1, H))
    V = np.empty(T1)
    h = h0.copy()
    for t in range(T1):
        Hprev[t] = h
        h = np.tanh(np.dot(Wx, U[t]) + np.dot(Wh, h) + b)
        Hs[t] = h
        V[t] = np.dot(w_out, h) + b_out

    grad[:] = 0.0
    gw_out = grad[ncell:ncell + H]
    DGT = np.zeros((H, T))
    dh = np.zeros(H)
    for t in range(T - 1, -1, -1):
        delta = usv[t + 1] + gamma * V[t + 1] - V[t]
        e = -delta / T
        dh = dh + e * w_out
        gw_out += e * Hs[t]
        grad[ncell + H] += e
        da = dh * (1.0 - Hs[t] * Hs[t])
        DGT[:, t] = da
        dh = np.dot(da, Wh)
    gWx = grad[:nwx].reshape(H, IN)
    gWx[:, :] = np.dot(DGT, U[:T])
    gWh = grad[nwx:nwx + nwh].reshape(H, H)
    gWh[:, :] = np.dot(DGT, Hprev[:T])
    grad[nwx + nwh:ncell] = np.sum(DGT, axis=1)


@njit(cache=True)
def lstm_window_grad(theta, H, IN, U, usv, h0, c0, gamma, grad):
    T1 = U.shape[0]
    T = T1 - 1
    G = 4 * H
    nwx = G * IN
    nwh = G * H
    ncell = nwx + nwh + G
    Wx = theta[:nwx].reshape(G, IN)
    Wh = theta[nwx:nwx + nwh].reshape(G, H)
    b = theta[nwx + nwh:ncell]
    w_out = theta[ncell:ncell + H]
    b_out = theta[ncell + H]

    Hprev = np.empty((T1, H))
    Cprev = np.empty((T1, H))
    Ig = np.empty((T1, H))
    Fg = np.empty((T1, H))
    Gg = np.empty((T1, H))
    Og = np.empty((T1, H))
    TC = np.empty((T1, H))
    Hs = np.empty((T1, H))
    V = np.empty(T1)
    h = h0.copy()
    c = c0.copy()
    for t in range(T1):
        Hprev[t] = h
        Cprev[t] = c
        a = np.dot(Wx, U[t]) + np.dot(Wh, h) + b
        i = 1.0 / (1.0 + np.exp(-a[:H]))
        f = 1.0 / (1.0 + np.exp(-a[H:2 * H]))
        g = np.tanh(a[2 * H:3 * H])
        o = 1.0 / (1.0 + np.exp(-a[3 * H:]))
        c = f * c + i * g
        tc = np.tanh(c)
        h = o * tc
        Ig[t] = i
        Fg[t] = f
        Gg[t] = g
        Og[t] = o
        TC[t] = tc
        Hs[t] = h
        V[t] = np.dot(w_out, h) + b_out

    grad[:] = 0.0
    gw_out = grad[ncell:ncell + H]
    DGT = np.zeros((G, T))
    da = np.empty(G)
    dh = np.zeros(H)
    dc = np.zeros(H)
    for t in range(T - 1, -1, -1):
        delta = usv[t + 1] + gamma * V[t + 1] - V[t]
        e = -delta / T
        dh = dh + e * w_out
        gw_out += e * Hs[t]
        grad[ncell + H] += e
        do = dh * TC[t]
        dc = dc + dh * Og[t] * (1.0 - TC[t] * TC[t])
        da[:H] = dc * Gg[t] * Ig[t] * (1.0 - Ig[t])
        da[H:2 * H] = dc * Cprev[t] * Fg[t] * (1.0 - Fg[t])
        da[2 * H:3 * H] = dc * Ig[t] * (1.0 - Gg[t] * Gg[t])
        da[3 * H:] = do * Og[t] * (1.0 - Og[t])
        DGT[:, t] = da
        dh = np.dot(da, Wh)
        dc = dc * Fg[t]
    gWx = grad[:nwx].reshape(G, IN)
    gWx[:, :] = np.dot(DGT, U[:T])
    gWh = grad[nwx:nwx + nwh].reshape(G, H)
    gWh[:, :] = np.dot(DGT, Hprev[:T])
    grad[nwx + nwh:ncell] = np.sum(DGT, axis=1)


@njit(cache=True)
def gru_window_grad(theta, H, IN, U, usv, h0, gamma, grad):
    T1 = U.shape[0]
    T = T1 - 1
    G = 3 * H
    nwx = G * IN
    nwh = G * H
    ncell = nwx + nwh + G
    Wx = theta[:nwx].reshape(G, IN)
    Wh = theta[nwx:nwx + nwh].reshape(G, H)
    b = theta[nwx + nwh:ncell]
    w_out = theta[ncell:ncell + H]
    b_out = theta[ncell + H]

    Hprev = np.empty((T1, H))
    RH = np.empty((T1, H))
    Z = np.empty((T1, H))
    R = np.empty((T1, H))
    N = np.empty((T1, H))
    Hs = np.empty((T1, H))
    V = np.empty(T1)
    h = h0.copy()
    for t in range(T1):
        Hprev[t] = h
        ax = np.dot(Wx, U[t]) + b
        azr = ax[:2 * H] + np.dot(Wh[:2 * H], h)
        z = 1.0 / (1.0 + np.exp(-azr[:H]))
        r = 1.0 / (1.0 + np.exp(-azr[H:]))
        rh = r * h
        n = np.tanh(ax[2 * H:] + np.dot(Wh[2 * H:], rh))
        h = (1.0 - z) * h + z * n
        Z[t] = z
        R[t] = r
        RH[t] = rh
        N[t] = n
        Hs[t] = h
        V[t] = np.dot(w_out, h) + b_out

    grad[:] = 0.0
    gw_out = grad[ncell:ncell + H]
    DGT = np.zeros((G, T))
    dh = np.zeros(H)
    for t in range(T - 1, -1, -1):
        delta = usv[t + 1] + gamma * V[t + 1] - V[t]
        e = -delta / T
        dh = dh + e * w_out
        gw_out += e * Hs[t]
        grad[ncell + H] += e
        dz = dh * (N[t] - Hprev[t])
        dn = dh * Z[t]
        dhp = dh * (1.0 - Z[t])
        dan = dn * (1.0 - N[t] * N[t])
        drh = np.dot(dan, Wh[2 * H:])
        dr = drh * Hprev[t]
        dhp = dhp + drh * R[t]
        daz = dz * Z[t] * (1.0 - Z[t])
        dar = dr * R[t] * (1.0 - R[t])
        DGT[:H, t] = daz
        DGT[H:2 * H, t] = dar
        DGT[2 * H:, t] = dan
        dh = dhp + np.dot(daz, Wh[:H]) + np.dot(dar, Wh[H:2 * H])
    gWx = grad[:nwx].reshape(G, IN)
    gWx[:, :] = np.dot(DGT, U[:T])
    gWh = grad[nwx:nwx + nwh].reshape(G, H)
    gWh[:2 * H, :] = np.dot(DGT[:2 * H], Hprev[:T])
    gWh[2 * H:, :] = np.dot(DGT[2 * H:], RH[:T])
    grad[nwx + nwh:ncell] = np.sum(DGT, axis=1)


# ---------------------------------------------------------------------------
# RTRL influence-matrix steps
#
# J has one row per state component (h for vanilla/GRU; h then c for LSTM)
# and one column per cell parameter, in flat layout order.  Each kernel
# computes the post-step state and J' = D_state @ J + D_params, where
# D_params holds the explicit derivatives with the previous state fixed.

@njit(cache=True)
def vanilla_rtrl_step(theta, H, IN, h, u, J):
    nwx = H * IN
    nwh = H * H
    Wx = theta[:nwx].reshape(H, IN)
    Wh = theta[nwx:nwx + nwh].reshape(H, H)
    b = theta[nwx + nwh:nwx + nwh + H]
    hn = np.tanh(np.dot(Wx, u) + np.dot(Wh, h) + b)
    d = 1.0 - hn * hn
    Ds = d.reshape(H, 1) * Wh
    Jn = np.dot(Ds, J)
    for j in range(H):
        bx = j * IN
        for k in range(IN):
            Jn[j, bx + k] += d[j] * u[k]
        bh = nwx + j * H
        for k in range(H):
            Jn[j, bh + k] += d[j] * h[k]
        Jn[j, nwx + nwh + j] += d[j]
    return hn, Jn


@njit(cache=True)
def lstm_rtrl_step(theta, H, IN, h, c, u, J):
    G = 4 * H
    nwx = G * IN
    nwh = G * H
    Wx = theta[:nwx].reshape(G, IN)
    Wh = theta[nwx:nwx + nwh].reshape(G, H)
    b = theta[nwx + nwh:nwx + nwh + G]
    a = np.dot(Wx, u) + np.dot(Wh, h) + b
    i = 1.0 / (1.0 + np.exp(-a[:H]))
    f = 1.0 / (1.0 + np.exp(-a[H:2 * H]))
    g = np.tanh(a[2 * H:3 * H])
    o = 1.0 / (1.0 + np.exp(-a[3 * H:]))
    cn = f * c + i * g
    tc = np.tanh(cn)
    hn = o * tc

    di = i * (1.0 - i) * g          # dc/da_i
    df = f * (1.0 - f) * c          # dc/da_f (c is the previous cell state)
    dg = (1.0 - g * g) * i          # dc/da_g
    do = o * (1.0 - o) * tc         # dh/da_o
    hc = o * (1.0 - tc * tc)        # dh/dc

    dc_dh = (di.reshape(H, 1) * Wh[:H]
             + df.reshape(H, 1) * Wh[H:2 * H]
             + dg.reshape(H, 1) * Wh[2 * H:3 * H])
    Ds = np.zeros((2 * H, 2 * H))
    Ds[:H, :H] = hc.reshape(H, 1) * dc_dh + do.reshape(H, 1) * Wh[3 * H:]
    Ds[H:, :H] = dc_dh
    for j in range(H):
        Ds[j, H + j] = hc[j] * f[j]
        Ds[H + j, H + j] = f[j]
    Jn = np.dot(Ds, J)

    for j in range(H):
        for gate in range(4):
            if gate == 0:
                cc = di[j]
            elif gate == 1:
                cc = df[j]
            elif gate == 2:
                cc = dg[j]
            else:
                cc = 0.0
            hh = do[j] if gate == 3 else hc[j] * cc
            row = gate * H + j
            bx = row * IN
            for k in range(IN):
                Jn[j, bx + k] += hh * u[k]
                Jn[H + j, bx + k] += cc * u[k]
            bh = nwx + row * H
            for k in range(H):
                Jn[j, bh + k] += hh * h[k]
                Jn[H + j, bh + k] += cc * h[k]
            bb = nwx + nwh + row
            Jn[j, bb] += hh
            Jn[H + j, bb] += cc
    return hn, cn, Jn


@njit(cache=True)
def gru_rtrl_step(theta, H, IN, h, u, J):
    G = 3 * H
    nwx = G * IN
    nwh = G * H
    Wx = theta[:nwx].reshape(G, IN)
    Wh = theta[nwx:nwx + nwh].reshape(G, H)
    b = theta[nwx + nwh:nwx + nwh + G]
    ax = np.dot(Wx, u) + b
    azr = ax[:2 * H] + np.dot(Wh[:2 * H], h)
    z = 1.0 / (1.0 + np.exp(-azr[:H]))
    r = 1.0 / (1.0 + np.exp(-azr[H:]))
    rh = r * h
    n = np.tanh(ax[2 * H:] + np.dot(Wh[2 * H:], rh))
    hn = (1.0 - z) * h + z * n

    dzs = z * (1.0 - z)
    drs = r * (1.0 - r)
    coef_z = (n - h) * dzs          # dh/da_z diagonal
    coef_n = z * (1.0 - n * n)      # dh/da_n diagonal

    # dh/dh_prev = diag(1-z) + coef_z*Wh_z
    #            + coef_n*(Wh_n*diag(r) + Wh_n*diag(h*drs)*Wh_r)
    Wn = Wh[2 * H:]
    inner = Wn * r.reshape(1, H) + np.dot(Wn * (h * drs).reshape(1, H), Wh[H:2 * H])
    Ds = coef_z.reshape(H, 1) * Wh[:H] + coef_n.reshape(H, 1) * inner
    for j in range(H):
        Ds[j, j] += 1.0 - z[j]
    Jn = np.dot(Ds, J)

    nb = nwx + nwh
    for j in range(H):
        bx = j * IN
        for k in range(IN):
            Jn[j, bx + k] += coef_z[j] * u[k]
        bh = nwx + j * H
        for k in range(H):
            Jn[j, bh + k] += coef_z[j] * h[k]
        Jn[j, nb + j] += coef_z[j]
        row = 2 * H + j
        bx = row * IN
        for k in range(IN):
            Jn[j, bx + k] += coef_n[j] * u[k]
        bh = nwx + row * H
        for k in range(H):
            Jn[j, bh + k] += coef_n[j] * rh[k]
        Jn[j, nb + row] += coef_n[j]
    # reset gate reaches h only through the candidate: dense coupling
    for j in range(H):
        for p in range(H):
            m = coef_n[j] * Wn[j, p] * h[p] * drs[p]
            if m != 0.0:
                row = H + p
                bx = row * IN
                for k in range(IN):
                    Jn[j, bx + k] += m * u[k]
                bh = nwx + row * H
                for k in range(H):
                    Jn[j, bh + k] += m * h[k]
                Jn[j, nb + row] += m
    return hn, Jn


# ---------------------------------------------------------------------------

@njit(cache=True)
def adam_step(theta, m, v, g, t, alpha, beta1, beta2, eps):
    """One bias-corrected first/second-moment update, in place."""
    bc1 = 1.0 - beta1 ** t
    bc2 = 1.0 - beta2 ** t
    for j in range(theta.shape[0]):
        m[j] = beta1 * m[j] + (1.0 - beta1) * g[j]
        v[j] = beta2 * v[j] + (1.0 - beta2) * g[j] * g[j]
        theta[j] -= alpha * (m[j] / bc1) / (np.sqrt(v[j] / bc2) + eps)
