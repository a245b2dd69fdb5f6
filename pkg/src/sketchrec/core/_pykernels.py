"""Pure-numpy LSTM recurrence kernels.

Fallback for the compiled extension; identical signatures and semantics.
Gate layout along the last axis is (input, forget, candidate, output),
each of width H. Sequences are padded to a common length T and frozen
once t reaches a sample's length, so the stored final state is the state
at the last real step.
"""

from __future__ import annotations

import numpy as np

COMPILED = False


def _sigmoid(x):
    out = np.empty_like(x)
    pos = x >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    ex = np.exp(x[~pos])
    out[~pos] = ex / (1.0 + ex)
    return out


def lstm_forward(xp: np.ndarray, wh: np.ndarray, lengths: np.ndarray):
    """Run the gated recurrence over pre-projected inputs.

    xp: (S, T, 4H) input projections (x @ Wx + b), wh: (H, 4H),
    lengths: (S,) valid step counts. Returns (h_all, c_all, gates,
    h_final) with h_all/c_all of shape (S, T+1, H) including the zero
    initial state, and gates (S, T, 4H) holding post-activation values.
    """
    s, t_max, g4 = xp.shape
    h = g4 // 4
    h_all = np.zeros((s, t_max + 1, h))
    c_all = np.zeros((s, t_max + 1, h))
    gates = np.zeros((s, t_max, g4))
    lengths = np.asarray(lengths, dtype=np.int64)
    for t in range(t_max):
        h_prev = h_all[:, t, :]
        c_prev = c_all[:, t, :]
        pre = xp[:, t, :] + h_prev @ wh
        gi = _sigmoid(pre[:, 0:h])
        gf = _sigmoid(pre[:, h : 2 * h])
        gg = np.tanh(pre[:, 2 * h : 3 * h])
        go = _sigmoid(pre[:, 3 * h : 4 * h])
        c_new = gf * c_prev + gi * gg
        h_new = go * np.tanh(c_new)
        m = (t < lengths).astype(np.float64)[:, None]
        # frozen steps keep zero gates, matching the compiled kernel's cache
        gates[:, t, 0:h] = m * gi
        gates[:, t, h : 2 * h] = m * gf
        gates[:, t, 2 * h : 3 * h] = m * gg
        gates[:, t, 3 * h : 4 * h] = m * go
        h_all[:, t + 1, :] = m * h_new + (1.0 - m) * h_prev
        c_all[:, t + 1, :] = m * c_new + (1.0 - m) * c_prev
    return h_all, c_all, gates, h_all[:, t_max, :].copy()


def lstm_backward(
    wh: np.ndarray,
    lengths: np.ndarray,
    h_all: np.ndarray,
    c_all: np.ndarray,
    gates: np.ndarray,
    dh_final: np.ndarray,
):
    """Backprop through the recurrence; returns (dxp, dwh)."""
    s, t_plus, h = h_all.shape
    t_max = t_plus - 1
    g4 = 4 * h
    lengths = np.asarray(lengths, dtype=np.int64)
    dxp = np.zeros((s, t_max, g4))
    dwh = np.zeros_like(wh)
    dh = np.array(dh_final, dtype=np.float64, copy=True)
    dc = np.zeros((s, h))
    for t in range(t_max - 1, -1, -1):
        m = (t < lengths).astype(np.float64)[:, None]
        gi = gates[:, t, 0:h]
        gf = gates[:, t, h : 2 * h]
        gg = gates[:, t, 2 * h : 3 * h]
        go = gates[:, t, 3 * h : 4 * h]
        c_prev = c_all[:, t, :]
        tanh_c = np.tanh(c_all[:, t + 1, :])
        dh_eff = dh * m
        dc_eff = dc * m
        d_o = dh_eff * tanh_c
        dct = dc_eff + dh_eff * go * (1.0 - tanh_c * tanh_c)
        d_i = dct * gg
        d_g = dct * gi
        d_f = dct * c_prev
        dc_prev = dct * gf
        dpre = np.concatenate(
            [
                d_i * gi * (1.0 - gi),
                d_f * gf * (1.0 - gf),
                d_g * (1.0 - gg * gg),
                d_o * go * (1.0 - go),
            ],
            axis=1,
        )
        dxp[:, t, :] = dpre
        dwh += h_all[:, t, :].T @ dpre
        dh = (1.0 - m) * dh + dpre @ wh.T
        dc = (1.0 - m) * dc + m * dc_prev
    return dxp, dwh
