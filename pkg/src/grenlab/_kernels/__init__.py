"""Hot numeric kernels with two interchangeable backends.

The numba backend JIT-compiles the per-replication loops; the pure-numpy
backend implements the same algorithms with vectorized scans. Both consume
randomness from the supplied generator in exactly the same order, so their
outputs are bitwise identical. Select with GRENLAB_KERNEL=numba|numpy
(default: numba when importable). benchmarks/bench_kernels.py compares them.
"""

from __future__ import annotations

import numpy as np

from grenlab._common import kernel_backend
from grenlab._kernels import numpy_impl

__all__ = ["lcm_keep_mask", "parabola_argmax_rep", "gamma_ratio_sup"]


def _impl():
    if kernel_backend() == "numba":
        from grenlab._kernels import numba_impl

        return numba_impl
    return numpy_impl


def lcm_keep_mask(x: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Boolean mask of the upper-concave-hull vertices of the point set.

    Points must be sorted by strictly increasing x. Collinear interior points
    are dropped (strict concavity at every kept vertex).
    """
    return _impl().lcm_keep_mask(np.ascontiguousarray(x, float), np.ascontiguousarray(y, float))


def parabola_argmax_rep(
    gen: np.random.Generator,
    n_half: int,
    step: float,
    refine: int,
    curvature: float,
    centers: np.ndarray,
) -> tuple[np.ndarray, int, int]:
    """One replication of drifted-Brownian argmax locations.

    Simulates a two-sided Brownian path on [-T, T] (T = n_half * step) pinned
    to zero at the origin and returns, for every center c, the rightmost
    maximizer of W(t) - curvature * (t - c)^2, sharpened by `refine` rounds of
    conditionally exact Brownian-bridge infill that shrink the grid step by 8
    around the incumbent. Returns (locations, boundary_hits, edge_stops);
    boundary hits mark maximizers on the truncation boundary, edge stops count
    refinement rounds abandoned at a window edge.
    """
    return _impl().parabola_argmax_rep(
        gen, int(n_half), float(step), int(refine), float(curvature), np.ascontiguousarray(centers, float)
    )


def gamma_ratio_sup(gen: np.random.Generator, j_trunc: int) -> float:
    """One sample of max_{1<=j<=J} j / (sum of j standard exponentials)."""
    return _impl().gamma_ratio_sup(gen, int(j_trunc))
