"""Pure-numpy kernel backend.

Reference implementations matching the numba backend draw for draw. The hull
uses simultaneous concavity passes instead of a stack (hull vertices are never
below a chord of surviving neighbors, so removing every flagged middle point
per pass is safe and the passes converge to the same hull).
"""

from __future__ import annotations

import numpy as np


def lcm_keep_mask(x: np.ndarray, y: np.ndarray) -> np.ndarray:
    idx = np.arange(x.size)
    while idx.size > 2:
        xs = x[idx]
        ys = y[idx]
        cross = (xs[1:-1] - xs[:-2]) * (ys[2:] - ys[:-2]) - (xs[2:] - xs[:-2]) * (ys[1:-1] - ys[:-2])
        bad = cross >= 0.0
        if not bad.any():
            break
        idx = idx[np.concatenate(([True], ~bad, [True]))]
    mask = np.zeros(x.size, dtype=bool)
    mask[idx] = True
    return mask


def _refine_window(gen, tau, wl, wc, wr, h_prev, curvature, c):
    """One refinement round: bridge-infill both intervals next to tau at
    step h_prev/8, return (new tau, new neighbors, hit_edge)."""
    h_new = h_prev / 8.0
    w = np.empty(17)
    t = tau + (np.arange(17) - 8.0) * h_new
    w[0], w[8], w[16] = wl, wc, wr
    cur_w, cur_t = wl, tau - h_prev
    for j in range(1, 8):
        remaining = tau - cur_t
        mean = cur_w + h_new * (wc - cur_w) / remaining
        var = h_new * (remaining - h_new) / remaining
        cur_w = mean + np.sqrt(var) * gen.standard_normal()
        cur_t += h_new
        w[j] = cur_w
    cur_w, cur_t = wc, tau
    for j in range(9, 16):
        remaining = tau + h_prev - cur_t
        mean = cur_w + h_new * (wr - cur_w) / remaining
        var = h_new * (remaining - h_new) / remaining
        cur_w = mean + np.sqrt(var) * gen.standard_normal()
        cur_t += h_new
        w[j] = cur_w
    vals = w - curvature * (t - c) ** 2
    mi = 16 - int(np.argmax(vals[::-1]))
    tau_new = tau + (mi - 8) * h_new
    if mi == 0 or mi == 16:
        return tau_new, 0.0, 0.0, 0.0, h_new, True
    return tau_new, w[mi - 1], w[mi], w[mi + 1], h_new, False


def parabola_argmax_rep(gen, n_half, step, refine, curvature, centers):
    n_nodes = 2 * n_half + 1
    z = gen.standard_normal(2 * n_half)
    path = np.empty(n_nodes)
    path[0] = 0.0
    np.cumsum(z * np.sqrt(step), out=path[1:])
    path -= path[n_half]
    big_t = n_half * step
    t = -big_t + np.arange(n_nodes) * step
    out = np.empty(centers.size)
    boundary_hits = 0
    edge_stops = 0
    for ci, c in enumerate(centers):
        vals = path - curvature * (t - c) ** 2
        i_star = n_nodes - 1 - int(np.argmax(vals[::-1]))
        if i_star == 0 or i_star == n_nodes - 1:
            boundary_hits += 1
            out[ci] = t[i_star]
            continue
        tau = t[i_star]
        wl, wc, wr = path[i_star - 1], path[i_star], path[i_star + 1]
        h_prev = step
        for _ in range(refine):
            tau, wl, wc, wr, h_prev, hit_edge = _refine_window(gen, tau, wl, wc, wr, h_prev, curvature, c)
            if hit_edge:
                edge_stops += 1
                break
        out[ci] = tau
    return out, boundary_hits, edge_stops


def gamma_ratio_sup(gen, j_trunc):
    gamma = np.cumsum(gen.standard_exponential(j_trunc))
    return float(np.max(np.arange(1, j_trunc + 1) / gamma))
