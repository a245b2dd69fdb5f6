"""Fused LSTM-over-sequences primitive with a hand-written backward rule.

Wraps the recurrence kernels (compiled or fallback) as a single autodiff
node: the input projection and its gradient are plain matmuls done here,
the time loop lives in the kernel.
"""

from __future__ import annotations

import numpy as np

from . import kernels
from .tensor import Tensor


def lstm_final_states(
    points: np.ndarray,
    lengths: np.ndarray,
    wx: Tensor,
    wh: Tensor,
    b: Tensor,
) -> Tensor:
    """Final hidden states of an LSTM over padded sequences.

    points: (S, T, F) padded input sequences (plain data, not a graph
    node), lengths: (S,) valid step counts, wx: (F, 4H), wh: (H, 4H),
    b: (4H,). Returns a (S, H) tensor of each sequence's last hidden
    state.
    """
    points = np.asarray(points, dtype=np.float64)
    lengths = np.asarray(lengths, dtype=np.int64)
    s, t_max, f = points.shape
    if wx.data.shape[0] != f:
        raise ValueError(f"input width {f} does not match wx {wx.data.shape}")
    g4 = wx.data.shape[1]
    h = g4 // 4
    if wh.data.shape != (h, g4) or b.data.shape != (g4,):
        raise ValueError(
            f"inconsistent LSTM shapes: wx {wx.data.shape}, wh {wh.data.shape}, b {b.data.shape}"
        )

    xp = points.reshape(s * t_max, f) @ wx.data + b.data
    xp = np.ascontiguousarray(xp.reshape(s, t_max, g4))
    h_all, c_all, gates, h_final = kernels.lstm_forward(xp, wh.data, lengths)

    out = Tensor._result(h_final, (wx, wh, b), None)

    def backward():
        dxp, dwh = kernels.lstm_backward(wh.data, lengths, h_all, c_all, gates, out.grad)
        flat = dxp.reshape(s * t_max, g4)
        wx._accumulate(points.reshape(s * t_max, f).T @ flat)
        wh._accumulate(dwh)
        b._accumulate(flat.sum(axis=0))

    out._backward = backward if out.requires_grad else None
    return out
