"""L_k error functionals between a fitted step density and the true density.

Everything is integrated exactly piecewise: the step function contributes
breakpoints, the single possible sign change per constant piece is located by
bisection, and each smooth signed sub-piece goes through adaptive high-order
quadrature. The inverse-scaled error integrates the deviation of the argmax
inverse from the true inverse in the level domain, where the inverse is a step
function of the level.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from grenlab._common import ConfigError
from grenlab.densities import MonotoneDensity
from grenlab.grenander import EmpiricalCDF, GrenanderEstimate, fit_lcm
from grenlab.quadrature import adaptive_quad_batch, bisect_root_vec

__all__ = [
    "ErrorSpec",
    "StandardizedStatistic",
    "SegmentGapResult",
    "lk_error",
    "inverse_lk_error",
    "segment_gap_check",
    "standardize",
    "modified_eps_window",
    "modified_lk_error",
]

QUAD_TOL = 1e-10
ROOT_TOL = 1e-12


@dataclass(frozen=True)
class ErrorSpec:
    """Exponent k >= 1, integration range, optional C^1 weight function."""

    k: float
    lo: float = 0.0
    hi: float = 1.0
    weight: Optional[Callable] = None

    def __post_init__(self):
        if self.k < 1:
            raise ConfigError(f"exponent k must be >= 1, got {self.k}")
        if not (0.0 <= self.lo < self.hi <= 1.0):
            raise ConfigError(f"range [{self.lo}, {self.hi}] must be a nonempty subset of [0, 1]")


@dataclass(frozen=True)
class StandardizedStatistic:
    """Raw error L and T = n^{1/6} (n^{1/3} L^{1/k} - mu_k) / sigma_k."""

    raw: float
    value: float


def _clipped_pieces(g: GrenanderEstimate, lo: float, hi: float):
    """Step pieces (l, r, value) intersected with [lo, hi]."""
    left = np.maximum(g.breakpoints[:-1], lo)
    right = np.minimum(g.breakpoints[1:], hi)
    keep = right > left
    return left[keep], right[keep], g.values[keep]


def _split_at_crossings(d: MonotoneDensity, left, right, values):
    """Split pieces where value - f(x) changes sign; one root per piece."""
    delta_l = values - d.f(left)
    delta_r = values - d.f(right)
    crossing = (delta_l < 0.0) & (delta_r > 0.0)
    if not crossing.any():
        return left, right
    roots = bisect_root_vec(
        lambda x, v=values[crossing]: v - d.f(x), left[crossing], right[crossing], ROOT_TOL
    )
    lo = np.concatenate([left, roots])
    hi = np.concatenate([right.copy(), right[crossing]])
    hi[np.flatnonzero(crossing)] = roots
    return lo, hi


def lk_error(g: GrenanderEstimate, d: MonotoneDensity, spec: ErrorSpec) -> float:
    """Integral of |fhat - f|^k (optionally weighted) over spec's range.

    Absolute quadrature error below 1e-10.
    """
    left, right, values = _clipped_pieces(g, spec.lo, spec.hi)
    if left.size == 0:
        return 0.0
    lo, hi = _split_at_crossings(d, left, right, values)
    bp, vals, k, w = g.breakpoints, g.values, spec.k, spec.weight

    def integrand(x):
        idx = np.minimum(np.searchsorted(bp[1:], x, side="left"), vals.size - 1)
        out = np.abs(vals[idx] - d.f(x)) ** k
        if w is not None:
            out = out * w(x)
        return out

    return adaptive_quad_batch(integrand, lo, hi, QUAD_TOL)


def _step_inverse_integral(
    levels_desc: np.ndarray,
    plateaus: np.ndarray,
    d: MonotoneDensity,
    p: float,
    q: float,
    a_lo: float,
    a_hi: float,
) -> float:
    """Integral of |U(a) - g(a)|^p |f'(g(a))|^q over [a_lo, a_hi].

    U is the step inverse taking value plateaus[j] on (levels[j+1], levels[j]]
    (levels descending, with +inf/-inf padding at the ends), i.e. the supremum
    of the set where the step function is >= a. 1/|g'|^q = |f'(g)|^q.
    """
    if a_hi <= a_lo:
        return 0.0
    levels_asc = levels_desc[::-1]

    def u_of(a):
        count = plateaus.size - 1 - np.searchsorted(levels_asc, a, side="left")
        return plateaus[np.clip(count, 0, plateaus.size - 1)]

    # split at jump levels of U inside the band
    inner = levels_desc[(levels_desc > a_lo) & (levels_desc < a_hi)]
    edges = np.concatenate([[a_lo], np.sort(inner), [a_hi]])
    lo, hi = edges[:-1], edges[1:]
    # split each constant-U piece at the crossing of U(a) - g(a), increasing in a
    mid_u = u_of(0.5 * (lo + hi))
    diff_lo = mid_u - d.g(np.maximum(lo, 1e-300))
    diff_hi = mid_u - d.g(hi)
    crossing = (diff_lo < 0.0) & (diff_hi > 0.0)
    if crossing.any():
        roots = bisect_root_vec(
            lambda a, u=mid_u[crossing]: u - d.g(a), lo[crossing], hi[crossing], ROOT_TOL
        )
        lo = np.concatenate([lo, roots])
        new_hi = hi.copy()
        new_hi[np.flatnonzero(crossing)] = roots
        hi = np.concatenate([new_hi, hi[crossing]])

    def integrand(a):
        gx = d.g(a)
        return np.abs(u_of(a) - gx) ** p * np.abs(d.f1(gx)) ** q

    return adaptive_quad_batch(integrand, lo, hi, QUAD_TOL)


def inverse_lk_error(e: EmpiricalCDF, d: MonotoneDensity, k: float, band) -> float:
    """Integral of |U_n(a) - g(a)|^k / |g'(a)|^{k-1} over the level band.

    U_n is constant between consecutive slopes of the concave majorant, so the
    integral splits exactly at those slopes and at the sign changes of
    U_n - g. band must sit inside [f(1), f(0)].
    """
    a_lo, a_hi = float(band[0]), float(band[1])
    if k < 1:
        raise ConfigError("exponent k must be >= 1")
    if not (d.f_at_1 - 1e-12 <= a_lo < a_hi <= d.f_at_0 + 1e-12):
        raise ConfigError(f"band [{a_lo}, {a_hi}] must lie inside [f(1), f(0)]")
    majorant = fit_lcm(e)
    slopes = majorant.slopes  # descending
    return _step_inverse_integral(slopes, majorant.tx, d, k, k - 1.0, a_lo, a_hi)


@dataclass(frozen=True)
class SegmentGapResult:
    """Gap between the direct and inverse-scaled errors on one segment, with
    the next-order integral that bounds it (up to a density-dependent
    constant) and the validity flag of the curvature condition."""

    gap: float
    bound: float
    condition_ok: bool
    band: tuple


def segment_gap_check(seg, g: GrenanderEstimate, d: MonotoneDensity, k: float) -> SegmentGapResult:
    """Compare direct and inverse-scaled errors on a sign-constant segment.

    seg is (s, t, case) from segment_decomposition of the cut-off estimate g.
    Returns the signed difference between the two error integrals on [s, t]
    and the bounding integral of |U - g|^{k+1} / |g'|^k over [f(t), f(s)].
    The comparison is only meaningful when the uniform deviation is below
    (inf |f'|)^2 / (2 sup |f''|); otherwise condition_ok is False and the
    caller should skip the ratio check.
    """
    s, t, _case = seg
    if t <= s:
        return SegmentGapResult(gap=0.0, bound=0.0, condition_ok=True, band=(0.0, 0.0))
    left, right, values = _clipped_pieces(g, s, t)
    sup_dev = float(
        np.max(np.maximum(np.abs(values - d.f(left)), np.abs(values - d.f(right))))
    )
    threshold = np.inf if d.sup_abs_f2 == 0.0 else d.inf_abs_f1 ** 2 / (2.0 * d.sup_abs_f2)
    condition_ok = sup_dev < threshold
    a_lo, a_hi = float(d.f(t)), float(d.f(s))
    direct = lk_error(g, d, ErrorSpec(k=k, lo=s, hi=t))
    inverse = _step_inverse_integral(g.values, g.breakpoints, d, k, k - 1.0, a_lo, a_hi)
    bound = _step_inverse_integral(g.values, g.breakpoints, d, k + 1.0, float(k), a_lo, a_hi)
    return SegmentGapResult(gap=direct - inverse, bound=bound, condition_ok=condition_ok, band=(a_lo, a_hi))


def standardize(L: float, n: int, k: float, mu_k: float, sigma_k: float) -> StandardizedStatistic:
    """T = n^{1/6} (n^{1/3} L^{1/k} - mu_k) / sigma_k."""
    if L < 0:
        raise ConfigError("raw error must be nonnegative")
    if sigma_k <= 0:
        raise ConfigError("sigma_k must be positive")
    n = float(n)
    value = n ** (1.0 / 6.0) * (n ** (1.0 / 3.0) * L ** (1.0 / k) - mu_k) / sigma_k
    return StandardizedStatistic(raw=float(L), value=float(value))


def modified_eps_window(k: float) -> tuple[float, float]:
    """Open admissible window (1/6, (k-1)/(3k-6)) for the range-trimming rate."""
    if k < 2.5:
        raise ConfigError(f"the modified error applies for k >= 2.5, got {k}")
    upper = (k - 1.0) / (3.0 * k - 6.0)
    return (1.0 / 6.0, upper)


def modified_lk_error(g: GrenanderEstimate, d: MonotoneDensity, k: float, eps: float, n: int) -> float:
    """L_k error over [n^-eps, 1 - n^-eps] for k >= 2.5.

    eps must lie strictly inside the admissible window; outside it the
    trimmed error is known to misbehave (boundary variance blow-up above,
    centering drift below).
    """
    win = modified_eps_window(k)
    if not (win[0] < eps < win[1]):
        raise ConfigError(
            f"eps = {eps} outside the admissible window ({win[0]:.6g}, {win[1]:.6g}) for k = {k}"
        )
    delta = float(n) ** -eps
    if not delta < 0.5:
        raise ConfigError(f"n = {n} too small: n^-eps = {delta} must be < 1/2")
    return lk_error(g, d, ErrorSpec(k=k, lo=delta, hi=1.0 - delta))
