"""Least concave majorant of the empirical CDF and the induced step density.

The estimator of a decreasing density is the left derivative of the least
concave majorant (LCM) of the empirical distribution function; its inverse is
the rightmost maximizer of F_n(x) - ax. Cut-off variants clip the step
function into a band and restrict the inverse's domain.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from grenlab._common import ConfigError
from grenlab._kernels import lcm_keep_mask
from grenlab.densities import MonotoneDensity
from grenlab.quadrature import bisect_root

__all__ = [
    "EmpiricalCDF",
    "ConcaveMajorant",
    "GrenanderEstimate",
    "CutoffSpec",
    "fit_lcm",
    "eval_fhat",
    "inverse_un",
    "apply_cutoff",
    "inverse_cutoff",
    "segment_decomposition",
]

FULL_RANGE = "full"
EPS_RANGE = "eps"

# Ties in the argmax objective resolve to the larger x; candidates within this
# relative distance of the maximum count as tied.
ARGMAX_REL_TOL = 1e-12


@dataclass(frozen=True)
class EmpiricalCDF:
    """Sorted sample on (0, 1] with its right-continuous empirical CDF."""

    x: np.ndarray
    n: int

    @staticmethod
    def from_sample(values) -> "EmpiricalCDF":
        x = np.sort(np.asarray(values, dtype=float))
        if x.size == 0:
            raise ConfigError("empty sample")
        if x[0] <= 0.0 or x[-1] > 1.0:
            raise ConfigError("sample values must lie in (0, 1]")
        return EmpiricalCDF(x=x, n=int(x.size))

    def eval(self, points) -> np.ndarray:
        """F_n(x) = #{i : x_(i) <= x} / n, right-continuous."""
        return np.searchsorted(self.x, np.asarray(points, dtype=float), side="right") / self.n

    def support_points(self) -> tuple[np.ndarray, np.ndarray]:
        """Distinct sample points with their ECDF levels; duplicates merged
        into the highest level (taller jumps, not errors)."""
        last_of_run = np.concatenate([self.x[1:] != self.x[:-1], [True]])
        xs = self.x[last_of_run]
        levels = (np.flatnonzero(last_of_run) + 1) / self.n
        return xs, levels


@dataclass(frozen=True)
class ConcaveMajorant:
    """Vertex list (t_j, y_j) of the LCM, t_0 = 0, y_0 = 0, t_m = 1, y_m = 1."""

    tx: np.ndarray
    ty: np.ndarray

    @property
    def slopes(self) -> np.ndarray:
        return np.diff(self.ty) / np.diff(self.tx)

    def eval(self, points) -> np.ndarray:
        return np.interp(np.asarray(points, dtype=float), self.tx, self.ty)


@dataclass(frozen=True)
class GrenanderEstimate:
    """Left-continuous nonincreasing step density.

    Value values[j] on (breakpoints[j], breakpoints[j+1]]; breakpoints[0] = 0
    and breakpoints[-1] = 1. At x = 0 evaluation returns the first value (the
    right limit, which is the meaningful finite object at the left endpoint).
    """

    breakpoints: np.ndarray  # length m + 1
    values: np.ndarray  # length m

    @staticmethod
    def from_majorant(m: ConcaveMajorant) -> "GrenanderEstimate":
        return GrenanderEstimate(breakpoints=m.tx, values=m.slopes)

    def mass(self) -> float:
        return float(np.sum(self.values * np.diff(self.breakpoints)))


def fit_lcm(e: EmpiricalCDF) -> ConcaveMajorant:
    """Upper concave hull of {(0,0)} + merged ECDF points + {(1,1)}, O(n)."""
    xs, levels = e.support_points()
    px = [np.array([0.0]), xs]
    py = [np.array([0.0]), levels]
    if xs[-1] != 1.0:
        px.append(np.array([1.0]))
        py.append(np.array([1.0]))
    x = np.concatenate(px)
    y = np.concatenate(py)
    mask = lcm_keep_mask(x, y)
    return ConcaveMajorant(tx=x[mask], ty=y[mask])


def eval_fhat(g: GrenanderEstimate, points) -> np.ndarray | float:
    """Left-continuous evaluation of the step density on [0, 1]."""
    pts = np.asarray(points, dtype=float)
    scalar = pts.ndim == 0
    pts = np.atleast_1d(pts)
    if np.any((pts < 0.0) | (pts > 1.0)):
        raise ConfigError("evaluation points must lie in [0, 1]")
    # piece index: first internal breakpoint >= x; x = 0 falls into piece 0
    idx = np.searchsorted(g.breakpoints[1:], pts, side="left")
    idx = np.minimum(idx, g.values.size - 1)
    out = g.values[idx]
    return float(out[0]) if scalar else out


def inverse_un(e: EmpiricalCDF, a: float) -> float:
    """Rightmost maximizer of F_n(x) - ax over {0} + sample points + {1}.

    Near-ties within a relative 1e-12 of the maximum resolve to the larger x,
    matching the supremum convention for the argmax. Satisfies the switch
    relation with the fitted step density at its continuity points.
    """
    xs, levels = e.support_points()
    cand_x = np.concatenate([[0.0], xs, [1.0]] if xs[-1] != 1.0 else [[0.0], xs])
    cand_y = np.concatenate([[0.0], levels, [1.0]] if xs[-1] != 1.0 else [[0.0], levels])
    vals = cand_y - a * cand_x
    top = float(np.max(vals))
    tol = ARGMAX_REL_TOL * max(1.0, abs(top))
    tied = np.flatnonzero(vals >= top - tol)
    return float(cand_x[tied[-1]])


@dataclass(frozen=True)
class CutoffSpec:
    """Clip band [lo, hi] for the step density and x-domain for its inverse."""

    mode: str
    lo: float
    hi: float
    xlo: float
    xhi: float

    @staticmethod
    def full_range(d: MonotoneDensity) -> "CutoffSpec":
        """Band [f(1), f(0)], full domain [0, 1]."""
        return CutoffSpec(mode=FULL_RANGE, lo=d.f_at_1, hi=d.f_at_0, xlo=0.0, xhi=1.0)

    @staticmethod
    def eps_range(d: MonotoneDensity, n: int, eps: float) -> "CutoffSpec":
        """Band [f(1 - n^-eps), f(n^-eps)], domain [n^-eps, 1 - n^-eps]."""
        if eps <= 0:
            raise ConfigError("eps must be positive")
        delta = float(n) ** -eps
        if not delta < 0.5:
            raise ConfigError(f"n^-eps = {delta} must be < 1/2 for a nonempty clip band")
        return CutoffSpec(
            mode=EPS_RANGE,
            lo=float(d.f(1.0 - delta)),
            hi=float(d.f(delta)),
            xlo=delta,
            xhi=1.0 - delta,
        )


def apply_cutoff(g: GrenanderEstimate, spec: CutoffSpec) -> GrenanderEstimate:
    """Clip step values into [spec.lo, spec.hi], merging equal neighbors."""
    clipped = np.clip(g.values, spec.lo, spec.hi)
    keep = np.concatenate([clipped[:-1] != clipped[1:], [True]])
    bp = np.concatenate([[g.breakpoints[0]], g.breakpoints[1:][keep]])
    return GrenanderEstimate(breakpoints=bp, values=clipped[keep])


def inverse_cutoff(g: GrenanderEstimate, spec: CutoffSpec, a: float) -> float:
    """sup{x in [xlo, xhi] : clipped step value at x >= a}; empty set -> xlo."""
    if not (spec.lo <= a <= spec.hi):
        raise ConfigError(f"level {a} outside the clip band [{spec.lo}, {spec.hi}]")
    cut = apply_cutoff(g, spec)
    qualifying = np.flatnonzero((cut.values >= a) & (cut.breakpoints[1:] >= spec.xlo))
    if qualifying.size == 0:
        return spec.xlo
    j = qualifying[-1]
    return float(min(cut.breakpoints[j + 1], spec.xhi))


def segment_decomposition(g: GrenanderEstimate, d: MonotoneDensity, tol: float = 1e-12):
    """Partition [0, 1] into maximal segments of constant sign of fhat - f.

    Requires g already cut off into [f(1), f(0)]. Within each constant piece
    the difference value - f(x) is strictly increasing, so it crosses zero at
    most once; crossings are bracketed and bisected to `tol`. Returns a list
    of (s, t, case) with case 1 where fhat >= f and case 2 where fhat <= f.
    """
    if np.min(g.values) < d.f_at_1 - 1e-9 or np.max(g.values) > d.f_at_0 + 1e-9:
        raise ConfigError("segment_decomposition expects a cut-off estimate inside [f(1), f(0)]")
    cuts = [0.0]
    signs = []
    bp, vals = g.breakpoints, g.values
    for j, v in enumerate(vals):
        left, right = bp[j], bp[j + 1]
        dl = v - float(d.f(left))
        dr = v - float(d.f(right))
        if dl < 0.0 < dr:
            root = bisect_root(lambda x, v=v: v - float(d.f(x)), left, right, tol)
            cuts.append(root)
            signs.append(2)
            cuts.append(right)
            signs.append(1)
        else:
            cuts.append(right)
            # piece sign: increasing difference, so the right end decides ties
            signs.append(1 if dr > 0.0 or (dr == 0.0 and dl >= 0.0) else 2)
    segments = []
    seg_start = cuts[0]
    cur = signs[0]
    for i in range(1, len(signs)):
        if signs[i] != cur:
            segments.append((seg_start, cuts[i], cur))
            seg_start = cuts[i]
            cur = signs[i]
    segments.append((seg_start, cuts[-1], cur))
    return segments
