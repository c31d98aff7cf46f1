"""Numba kernel backend: JIT per-replication loops, same draws as numpy_impl."""

from __future__ import annotations

import numpy as np
from numba import njit


@njit(cache=True)
def lcm_keep_mask(x, y):
    n = x.size
    stack = np.empty(n, np.int64)
    top = 0
    for i in range(n):
        while top >= 2:
            a = stack[top - 2]
            b = stack[top - 1]
            cross = (x[b] - x[a]) * (y[i] - y[a]) - (x[i] - x[a]) * (y[b] - y[a])
            if cross >= 0.0:
                top -= 1
            else:
                break
        stack[top] = i
        top += 1
    mask = np.zeros(n, np.bool_)
    for j in range(top):
        mask[stack[j]] = True
    return mask


@njit(cache=True)
def parabola_argmax_rep(gen, n_half, step, refine, curvature, centers):
    n_nodes = 2 * n_half + 1
    z = gen.standard_normal(2 * n_half)
    sq = np.sqrt(step)
    path = np.empty(n_nodes)
    path[0] = 0.0
    acc = 0.0
    for i in range(2 * n_half):
        acc += z[i] * sq
        path[i + 1] = acc
    origin = path[n_half]
    for i in range(n_nodes):
        path[i] -= origin
    big_t = n_half * step
    out = np.empty(centers.size)
    boundary_hits = 0
    edge_stops = 0
    w = np.empty(17)
    for ci in range(centers.size):
        c = centers[ci]
        best = -np.inf
        i_star = 0
        for i in range(n_nodes):
            d = (-big_t + i * step) - c
            v = path[i] - curvature * (d * d)
            if v >= best:
                best = v
                i_star = i
        if i_star == 0 or i_star == n_nodes - 1:
            boundary_hits += 1
            out[ci] = -big_t + i_star * step
            continue
        tau = -big_t + i_star * step
        wl = path[i_star - 1]
        wc = path[i_star]
        wr = path[i_star + 1]
        h_prev = step
        for _ in range(refine):
            h_new = h_prev / 8.0
            w[0] = wl
            w[8] = wc
            w[16] = wr
            cur_w = wl
            cur_t = tau - h_prev
            for j in range(1, 8):
                remaining = tau - cur_t
                mean = cur_w + h_new * (wc - cur_w) / remaining
                var = h_new * (remaining - h_new) / remaining
                cur_w = mean + np.sqrt(var) * gen.standard_normal()
                cur_t += h_new
                w[j] = cur_w
            cur_w = wc
            cur_t = tau
            for j in range(9, 16):
                remaining = tau + h_prev - cur_t
                mean = cur_w + h_new * (wr - cur_w) / remaining
                var = h_new * (remaining - h_new) / remaining
                cur_w = mean + np.sqrt(var) * gen.standard_normal()
                cur_t += h_new
                w[j] = cur_w
            best = -np.inf
            mi = 0
            for m in range(17):
                d = (tau + (m - 8.0) * h_new) - c
                v = w[m] - curvature * (d * d)
                if v >= best:
                    best = v
                    mi = m
            tau = tau + (mi - 8.0) * h_new
            h_prev = h_new
            if mi == 0 or mi == 16:
                edge_stops += 1
                break
            wl = w[mi - 1]
            wc = w[mi]
            wr = w[mi + 1]
        out[ci] = tau
    return out, boundary_hits, edge_stops


@njit(cache=True)
def gamma_ratio_sup(gen, j_trunc):
    e = gen.standard_exponential(j_trunc)
    acc = 0.0
    best = -np.inf
    for j in range(j_trunc):
        acc += e[j]
        r = (j + 1) / acc
        if r > best:
            best = r
    return best
