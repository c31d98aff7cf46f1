"""Distribution-comparison helpers: KS tests, skewness, normal quantiles."""

from __future__ import annotations

import numpy as np
from scipy import stats as sps

__all__ = [
    "ks_two_sample",
    "ks_normal",
    "skewness",
    "normal_quantiles",
    "log_survival_cubic_fit",
]


def ks_two_sample(x, y) -> tuple[float, float]:
    """Two-sample Kolmogorov-Smirnov distance and p-value."""
    res = sps.ks_2samp(np.asarray(x, float), np.asarray(y, float), method="asymp")
    return float(res.statistic), float(res.pvalue)


def ks_normal(x) -> tuple[float, float]:
    """One-sample KS distance and p-value against the standard normal."""
    res = sps.kstest(np.asarray(x, float), "norm")
    return float(res.statistic), float(res.pvalue)


def skewness(x) -> float:
    return float(sps.skew(np.asarray(x, float), bias=False))


def normal_quantiles(p) -> np.ndarray:
    return sps.norm.ppf(np.asarray(p, float))


def log_survival_cubic_fit(samples, x_lo: float, x_hi: float, n_points: int = 12):
    """Fit log P{|X| >= x} against x^3 on a grid in [x_lo, x_hi].

    Returns (slope, intercept, r_squared, n_used). Grid points with empty
    survival counts are dropped. A clearly negative slope with high r_squared
    is the empirical signature of a cubic-exponential tail.
    """
    absx = np.abs(np.asarray(samples, float))
    grid = np.linspace(x_lo, x_hi, n_points)
    surv = np.array([np.mean(absx >= g) for g in grid])
    keep = surv > 0
    if keep.sum() < 3:
        return 0.0, 0.0, 0.0, int(keep.sum())
    u = grid[keep] ** 3
    y = np.log(surv[keep])
    slope, intercept = np.polyfit(u, y, 1)
    fitted = slope * u + intercept
    ss_res = float(np.sum((y - fitted) ** 2))
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    r2 = 1.0 - ss_res / ss_tot if ss_tot > 0 else 0.0
    return float(slope), float(intercept), float(r2), int(keep.sum())
