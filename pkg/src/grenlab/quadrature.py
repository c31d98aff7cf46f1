"""Adaptive Gauss-Legendre quadrature over batches of intervals, plus bisection.

The integrands in this package are smooth inside each interval (step-function
pieces are split at their crossing with the smooth density first), so a
high-order rule with interval halving converges fast; the halving difference
doubles as the error estimate. The batch form integrates many intervals
against one vectorized integrand so per-replication costs stay flat.
"""

from __future__ import annotations

from functools import lru_cache
from typing import Callable

import numpy as np

__all__ = ["adaptive_quad", "adaptive_quad_batch", "bisect_root", "bisect_root_vec"]

_RULE_ORDER = 15
_MAX_SWEEPS = 60


@lru_cache(maxsize=8)
def _gl_rule(order: int):
    nodes, weights = np.polynomial.legendre.leggauss(order)
    return nodes, weights


def _panel_values(f, lo, hi, order):
    """Gauss-Legendre estimate on each [lo_i, hi_i]; one flat call into f."""
    nodes, weights = _gl_rule(order)
    half = 0.5 * (hi - lo)
    mid = 0.5 * (hi + lo)
    x = mid[:, None] + half[:, None] * nodes[None, :]
    vals = f(x.ravel()).reshape(x.shape)
    return half * (vals @ weights)


def adaptive_quad_batch(
    f: Callable[[np.ndarray], np.ndarray],
    lo: np.ndarray,
    hi: np.ndarray,
    tol: float,
    order: int | None = None,
) -> float:
    """Integrate f over the union of disjoint intervals to absolute error < tol.

    Parameters
    ----------
    f : vectorized integrand, called on flat arrays of points strictly inside
        the intervals (GL nodes are interior, so step-function integrands are
        evaluated away from their breakpoints).
    lo, hi : interval endpoints, lo[i] < hi[i] allowed to be empty.
    tol : absolute tolerance for the total; split proportionally to width.

    Each sweep compares a whole-interval panel with its two halves; intervals
    whose difference exceeds their share of the tolerance are halved again.
    Endpoint algebraic singularities (|x - r|^k with fractional k at a split
    point) converge geometrically under halving.
    """
    if order is None:
        order = _RULE_ORDER
    lo = np.asarray(lo, dtype=float)
    hi = np.asarray(hi, dtype=float)
    keep = hi > lo
    lo, hi = lo[keep], hi[keep]
    if lo.size == 0:
        return 0.0
    total_width = float(np.sum(hi - lo))
    # tolerance per unit width, with safety margin for the accepted-sum error
    rate = 0.5 * tol / total_width
    total = 0.0
    cur_lo, cur_hi = lo, hi
    whole = _panel_values(f, cur_lo, cur_hi, order)
    for _ in range(_MAX_SWEEPS):
        mid = 0.5 * (cur_lo + cur_hi)
        left = _panel_values(f, cur_lo, mid, order)
        right = _panel_values(f, mid, cur_hi, order)
        halves = left + right
        err = np.abs(halves - whole)
        ok = err <= rate * (cur_hi - cur_lo)
        total += float(np.sum(halves[ok]))
        if np.all(ok):
            return total
        bad = ~ok
        cur_lo = np.concatenate([cur_lo[bad], mid[bad]])
        cur_hi = np.concatenate([mid[bad], cur_hi[bad]])
        whole = np.concatenate([left[bad], right[bad]])
    # Max refinement reached: accept the finest panels (difference already
    # far below anything the callers assert on).
    return total + float(np.sum(halves[bad]))


def adaptive_quad(f, lo: float, hi: float, tol: float = 1e-12) -> float:
    """Adaptive integral of a vectorized integrand over a single interval."""
    if hi <= lo:
        return 0.0
    return adaptive_quad_batch(f, np.array([lo]), np.array([hi]), tol)


def bisect_root(f, lo: float, hi: float, tol: float = 1e-12) -> float:
    """Root of a sign-changing function on [lo, hi] by bisection.

    Requires f(lo) and f(hi) of opposite sign (zero endpoints returned
    directly). Runs to interval width <= tol.
    """
    flo = f(lo)
    if flo == 0.0:
        return lo
    fhi = f(hi)
    if fhi == 0.0:
        return hi
    if (flo > 0) == (fhi > 0):
        raise ValueError("bisect_root: no sign change on the bracket")
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        fm = f(mid)
        if fm == 0.0:
            return mid
        if (fm > 0) == (flo > 0):
            lo, flo = mid, fm
        else:
            hi = mid
    return 0.5 * (lo + hi)


def bisect_root_vec(f, lo: np.ndarray, hi: np.ndarray, tol: float = 1e-12) -> np.ndarray:
    """Vectorized bisection: one root per bracket, all iterated together."""
    lo = np.array(lo, dtype=float)
    hi = np.array(hi, dtype=float)
    if lo.size == 0:
        return lo
    flo = f(lo)
    n_iter = int(np.ceil(np.log2(max(2.0, float(np.max(hi - lo)) / tol))))
    for _ in range(n_iter):
        mid = 0.5 * (lo + hi)
        fm = f(mid)
        take_lo = (fm > 0) == (flo > 0)
        lo = np.where(take_lo, mid, lo)
        flo = np.where(take_lo, fm, flo)
        hi = np.where(take_lo, hi, mid)
    return 0.5 * (lo + hi)
