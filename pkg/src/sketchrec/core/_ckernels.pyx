# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled LSTM recurrence kernels.

Same contract as the pure-numpy fallback module; see _pykernels.py for
the semantics. The recurrence is the one loop in the package that cannot
be vectorized over time, which is why it gets a compiled core.
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport exp, tanh

cnp.import_array()

COMPILED = True


cdef inline double _sig(double x) nogil:
    if x >= 0.0:
        return 1.0 / (1.0 + exp(-x))
    cdef double e = exp(x)
    return e / (1.0 + e)


def lstm_forward(double[:, :, ::1] xp, double[:, ::1] wh, long[::1] lengths):
    cdef Py_ssize_t s_n = xp.shape[0]
    cdef Py_ssize_t t_max = xp.shape[1]
    cdef Py_ssize_t g4 = xp.shape[2]
    cdef Py_ssize_t h = g4 // 4

    h_all_arr = np.zeros((s_n, t_max + 1, h))
    c_all_arr = np.zeros((s_n, t_max + 1, h))
    gates_arr = np.zeros((s_n, t_max, g4))
    hfin_arr = np.zeros((s_n, h))
    cdef double[:, :, ::1] h_all = h_all_arr
    cdef double[:, :, ::1] c_all = c_all_arr
    cdef double[:, :, ::1] gates = gates_arr
    cdef double[:, ::1] hfin = hfin_arr

    cdef Py_ssize_t s, t, a, b, length
    cdef double ha, gi, gf, gg, go, c_new
    pre_arr = np.zeros(g4)
    cdef double[::1] pre = pre_arr

    for s in range(s_n):
        length = lengths[s]
        if length > t_max:
            length = t_max
        for t in range(t_max):
            if t >= length:
                for a in range(h):
                    h_all[s, t + 1, a] = h_all[s, t, a]
                    c_all[s, t + 1, a] = c_all[s, t, a]
                continue
            for b in range(g4):
                pre[b] = xp[s, t, b]
            # stride-1 inner loop over wh rows
            for a in range(h):
                ha = h_all[s, t, a]
                for b in range(g4):
                    pre[b] += ha * wh[a, b]
            for a in range(h):
                gi = _sig(pre[a])
                gf = _sig(pre[h + a])
                gg = tanh(pre[2 * h + a])
                go = _sig(pre[3 * h + a])
                gates[s, t, a] = gi
                gates[s, t, h + a] = gf
                gates[s, t, 2 * h + a] = gg
                gates[s, t, 3 * h + a] = go
                c_new = gf * c_all[s, t, a] + gi * gg
                c_all[s, t + 1, a] = c_new
                h_all[s, t + 1, a] = go * tanh(c_new)
        for a in range(h):
            hfin[s, a] = h_all[s, t_max, a]
    return h_all_arr, c_all_arr, gates_arr, hfin_arr


def lstm_backward(
    double[:, ::1] wh,
    long[::1] lengths,
    double[:, :, ::1] h_all,
    double[:, :, ::1] c_all,
    double[:, :, ::1] gates,
    double[:, ::1] dh_final,
):
    cdef Py_ssize_t s_n = h_all.shape[0]
    cdef Py_ssize_t t_max = h_all.shape[1] - 1
    cdef Py_ssize_t h = h_all.shape[2]
    cdef Py_ssize_t g4 = 4 * h

    dxp_arr = np.zeros((s_n, t_max, g4))
    dwh_arr = np.zeros((h, g4))
    cdef double[:, :, ::1] dxp = dxp_arr
    cdef double[:, ::1] dwh = dwh_arr

    dh_arr = np.zeros(h)
    dc_arr = np.zeros(h)
    dpre_arr = np.zeros(g4)
    cdef double[::1] dh = dh_arr
    cdef double[::1] dc = dc_arr
    cdef double[::1] dpre = dpre_arr

    cdef Py_ssize_t s, t, a, b, length
    cdef double gi, gf, gg, go, tanh_c, d_o, dct, acc, ha

    for s in range(s_n):
        length = lengths[s]
        if length > t_max:
            length = t_max
        for a in range(h):
            dh[a] = dh_final[s, a]
            dc[a] = 0.0
        for t in range(length - 1, -1, -1):
            for a in range(h):
                gi = gates[s, t, a]
                gf = gates[s, t, h + a]
                gg = gates[s, t, 2 * h + a]
                go = gates[s, t, 3 * h + a]
                tanh_c = tanh(c_all[s, t + 1, a])
                d_o = dh[a] * tanh_c
                dct = dc[a] + dh[a] * go * (1.0 - tanh_c * tanh_c)
                dpre[a] = (dct * gg) * gi * (1.0 - gi)
                dpre[h + a] = (dct * c_all[s, t, a]) * gf * (1.0 - gf)
                dpre[2 * h + a] = (dct * gi) * (1.0 - gg * gg)
                dpre[3 * h + a] = d_o * go * (1.0 - go)
                dc[a] = dct * gf
            for b in range(g4):
                dxp[s, t, b] = dpre[b]
            # stride-1 accumulation into dwh rows
            for a in range(h):
                ha = h_all[s, t, a]
                for b in range(g4):
                    dwh[a, b] += ha * dpre[b]
            for a in range(h):
                acc = 0.0
                for b in range(g4):
                    acc += dpre[b] * wh[a, b]
                dh[a] = acc
    return dxp_arr, dwh_arr
