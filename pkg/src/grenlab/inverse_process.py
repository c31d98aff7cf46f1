"""Localized inverse-process simulation at a fixed level.

For a level a strictly inside (f(1), f(0)) and sample size n, the scaled
deviation of the inverse estimator concentrates like the argmax of a drifted
path: an empirical version comes straight from data, and Brownian-motion /
Brownian-bridge versions are simulated here as marginal laws (a fresh path per
replication composed with the CDF time change, plus the exact deterministic
drift). These reproduce the laws of the localized processes, not a coupled
construction on one probability space.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, replace
from functools import lru_cache

import numpy as np

from grenlab._common import ConfigError
from grenlab.densities import MonotoneDensity
from grenlab.grenander import EmpiricalCDF, inverse_un

__all__ = [
    "LocalizedArgmaxSpec",
    "ProfilePoint",
    "dev_scale",
    "offset_scale",
    "empirical_inverse_dev",
    "vn_E",
    "simulate_inverse_dev",
    "simulate_inverse_dev_flagged",
    "simulate_vn",
    "scaled_inverse_dev",
    "scaled_vn",
    "moment_profile",
]

PROCESS_EMPIRICAL = "E"
PROCESS_BRIDGE = "B"
PROCESS_BROWNIAN = "W"


def dev_scale(d: MonotoneDensity, a: float) -> float:
    """|f'(g(a))|^{2/3} (4a)^{-1/3}: normalizes the deviation to limit scale."""
    return float(np.abs(d.f1(d.g(a))) ** (2.0 / 3.0) * (4.0 * a) ** (-1.0 / 3.0))


def offset_scale(d: MonotoneDensity, a: float) -> float:
    """(4a)^{1/3} |f'(g(a))|^{1/3}: maps a unit offset to a level shift.

    The product dev_scale * offset_scale equals |f'(g(a))| identically.
    """
    return float((4.0 * a) ** (1.0 / 3.0) * np.abs(d.f1(d.g(a))) ** (1.0 / 3.0))


@dataclass(frozen=True)
class LocalizedArgmaxSpec:
    """Level, sample size, process tag and discretization for one simulation.

    process is one of "E" (empirical; needs data, see empirical_inverse_dev),
    "B" (Brownian bridge) or "W" (Brownian motion). The level must be strictly
    inside (f(1), f(0)). For the simulated processes the localized window maps
    into [0, 1] through the CDF; depth_margin() reports how far the level is
    from the boundary in the n^{1/3} F-scale relative to log n, the regime
    where the localized approximation is trustworthy.
    """

    density: MonotoneDensity
    a: float
    n: int
    process: str = PROCESS_BROWNIAN
    step: float = 2.0 ** -10
    refine: int = 3

    def __post_init__(self):
        if self.process not in (PROCESS_EMPIRICAL, PROCESS_BRIDGE, PROCESS_BROWNIAN):
            raise ConfigError(f"process must be E, B or W, got {self.process!r}")
        d = self.density
        if not (d.f_at_1 < self.a < d.f_at_0):
            raise ConfigError(f"level {self.a} not strictly inside ({d.f_at_1}, {d.f_at_0})")
        if self.n < 2:
            raise ConfigError("n must be >= 2")
        if self.step <= 0 or self.refine < 0:
            raise ConfigError("bad discretization parameters")

    def depth_margin(self) -> float:
        """n^{1/3} min(F(g(a)), 1 - F(g(a))) - log n; >= 0 means deep enough."""
        d = self.density
        fg = float(d.F(d.g(self.a)))
        return float(self.n) ** (1.0 / 3.0) * min(fg, 1.0 - fg) - math.log(self.n)

    @property
    def depth_ok(self) -> bool:
        return self.depth_margin() >= 0.0


def empirical_inverse_dev(e: EmpiricalCDF, d: MonotoneDensity, a: float) -> float:
    """n^{1/3} (U_n(a) - g(a)): the empirical localized deviation."""
    if not (d.f_at_1 < a < d.f_at_0):
        raise ConfigError(f"level {a} not strictly inside ({d.f_at_1}, {d.f_at_0})")
    return float(e.n) ** (1.0 / 3.0) * (inverse_un(e, a) - float(d.g(a)))


# operation alias: the deviation built from the empirical process
vn_E = empirical_inverse_dev


@lru_cache(maxsize=64)
def _grid(spec: LocalizedArgmaxSpec):
    """t grid over the maximal window (g(a) + t n^{-1/3} stays in [0, 1]),
    with the origin exactly on a node; returns (t, s, drift, origin_index).

    Deterministic per spec (the randomness lives in the path), so cached:
    replication loops reuse one grid."""
    d = spec.density
    n13 = float(spec.n) ** (1.0 / 3.0)
    ga = float(d.g(spec.a))
    j_neg = int(math.floor(n13 * ga / spec.step))
    j_pos = int(math.floor(n13 * (1.0 - ga) / spec.step))
    t = np.arange(-j_neg, j_pos + 1) * spec.step
    x = np.clip(ga + t / n13, 0.0, 1.0)
    s = np.clip(d.F(x), 0.0, 1.0)
    s0 = s[j_neg]
    drift = float(spec.n) ** (2.0 / 3.0) * (s - s0) - n13 * spec.a * t
    return t, s, drift, j_neg


def _path(spec: LocalizedArgmaxSpec, s: np.ndarray, j0: int, rng: np.random.Generator) -> np.ndarray:
    """n^{1/6}-scaled path at the s nodes, pinned to 0 at index j0.

    W: Brownian motion increments over the s steps. B: Brownian bridge via
    B(s) = W(s) - s W(1), which is stable near s = 1 and needs two extra
    draws (the initial value and the final stretch to s = 1).
    """
    n16 = float(spec.n) ** (1.0 / 6.0)
    ds = np.sqrt(np.maximum(np.diff(s), 0.0))
    if spec.process == PROCESS_BROWNIAN:
        z = rng.standard_normal(ds.size)
        nodes = np.concatenate([[0.0], np.cumsum(ds * z)])
        return n16 * (nodes - nodes[j0])
    z = rng.standard_normal(ds.size + 2)
    w_first = math.sqrt(max(s[0], 0.0)) * z[0]
    w = np.concatenate([[w_first], w_first + np.cumsum(ds * z[1 : ds.size + 1])])
    w_one = w[-1] + math.sqrt(max(1.0 - s[-1], 0.0)) * z[-1]
    bridge = w - s * w_one
    return n16 * (bridge - bridge[j0])


def _refine_localized(spec, rng, tau, xl, xc, xr, d_prev):
    """One refinement round in the t domain with bridge infill in the s time
    change; drift is recomputed exactly at the new nodes."""
    d = spec.density
    n13 = float(spec.n) ** (1.0 / 3.0)
    var_scale = n13  # path carries n^{1/6}, variances scale by n^{1/3}
    d_new = d_prev / 8.0
    t_new = tau + (np.arange(17) - 8.0) * d_new
    x_new = np.clip(float(d.g(spec.a)) + t_new / n13, 0.0, 1.0)
    s_new = np.clip(d.F(x_new), 0.0, 1.0)
    ga = float(d.g(spec.a))
    s0 = float(d.F(ga))
    drift = float(spec.n) ** (2.0 / 3.0) * (s_new - s0) - n13 * spec.a * t_new
    vals = np.empty(17)
    vals[0], vals[8], vals[16] = xl, xc, xr
    cur_v, cur_s = xl, s_new[0]
    for j in range(1, 8):
        rem = s_new[8] - cur_s
        stp = s_new[j] - cur_s
        mean = cur_v + stp * (xc - cur_v) / rem
        var = var_scale * stp * (rem - stp) / rem
        cur_v = mean + math.sqrt(max(var, 0.0)) * rng.standard_normal()
        cur_s = s_new[j]
        vals[j] = cur_v
    cur_v, cur_s = xc, s_new[8]
    for j in range(9, 16):
        rem = s_new[16] - cur_s
        stp = s_new[j] - cur_s
        mean = cur_v + stp * (xr - cur_v) / rem
        var = var_scale * stp * (rem - stp) / rem
        cur_v = mean + math.sqrt(max(var, 0.0)) * rng.standard_normal()
        cur_s = s_new[j]
        vals[j] = cur_v
    total = vals + drift
    mi = 16 - int(np.argmax(total[::-1]))
    tau_new = tau + (mi - 8) * d_new
    if mi == 0 or mi == 16:
        return tau_new, 0.0, 0.0, 0.0, d_new, True
    return tau_new, vals[mi - 1], vals[mi], vals[mi + 1], d_new, False


def simulate_inverse_dev_flagged(spec: LocalizedArgmaxSpec, rng: np.random.Generator) -> tuple[float, bool]:
    """One draw of the localized inverse deviation for process B or W, with a
    flag marking maximizers on the window boundary.

    Discretizes the maximal t window, adds the exact drift, and returns the
    rightmost grid maximizer sharpened by bridge-infill refinement. Boundary
    maximizers are genuine domain edges (the inverse saturates at 0 or 1);
    they are flagged and returned unrefined.
    """
    if spec.process == PROCESS_EMPIRICAL:
        raise ConfigError("the empirical deviation needs data; use empirical_inverse_dev")
    t, s, drift, j0 = _grid(spec)
    path = _path(spec, s, j0, rng)
    vals = path + drift
    i_star = t.size - 1 - int(np.argmax(vals[::-1]))
    if i_star == 0 or i_star == t.size - 1:
        return float(t[i_star]), True
    tau = float(t[i_star])
    xl, xc, xr = path[i_star - 1], path[i_star], path[i_star + 1]
    d_prev = spec.step
    for _ in range(spec.refine):
        tau, xl, xc, xr, d_prev, edge = _refine_localized(spec, rng, tau, xl, xc, xr, d_prev)
        if edge:
            break
    return tau, False


def simulate_inverse_dev(spec: LocalizedArgmaxSpec, rng: np.random.Generator) -> float:
    """Localized inverse deviation draw; see simulate_inverse_dev_flagged."""
    return simulate_inverse_dev_flagged(spec, rng)[0]


# short aliases matching the process-tag vocabulary
simulate_vn = simulate_inverse_dev
simulate_vn_flagged = simulate_inverse_dev_flagged


def scaled_inverse_dev(spec: LocalizedArgmaxSpec, c: float, rng: np.random.Generator) -> float:
    """Deviation at the offset-shifted level, normalized to the limit scale:
    dev_scale(a) times the deviation at a - offset_scale(a) c n^{-1/3}."""
    d = spec.density
    shifted = spec.a - offset_scale(d, spec.a) * c * float(spec.n) ** (-1.0 / 3.0)
    if not (d.f_at_1 < shifted < d.f_at_0):
        raise ConfigError(f"shifted level {shifted} leaves ({d.f_at_1}, {d.f_at_0})")
    return dev_scale(d, spec.a) * simulate_inverse_dev(replace(spec, a=shifted), rng)


scaled_vn = scaled_inverse_dev


@dataclass(frozen=True)
class ProfilePoint:
    a: float
    estimate: float
    se: float
    prediction: float

    @property
    def ratio(self) -> float:
        return self.estimate / self.prediction


def moment_profile(
    d: MonotoneDensity,
    k: float,
    a_grid,
    n: int,
    reps: int,
    seed: int,
    ev_k: float,
    step: float = 2.0 ** -10,
    refine: int = 3,
):
    """Estimate E|V_n(a)|^k across levels against its limit prediction
    ev_k (4a)^{k/3} / |f'(g(a))|^{2k/3}.

    Levels too close to the boundary (depth margin < 0) are dropped with a
    warning. Returns (points, band_integral) where band_integral integrates
    estimate / |g'(a)|^{k-1} over the surviving grid (trapezoid); in the
    large-n limit the full-band version of that integral recovers mu_k^k.
    """
    from grenlab._common import STREAM_LOCALIZED, substream

    points = []
    kept_a = []
    kept_est = []
    for ai, a in enumerate(np.asarray(a_grid, dtype=float)):
        spec = LocalizedArgmaxSpec(density=d, a=float(a), n=n, process=PROCESS_BROWNIAN, step=step, refine=refine)
        if not spec.depth_ok:
            warnings.warn(f"level {a} too shallow for n = {n}; dropped", stacklevel=2)
            continue
        draws = np.empty(reps)
        for i in range(reps):
            draws[i] = simulate_inverse_dev(spec, substream(seed, STREAM_LOCALIZED, ai, i))
        powered = np.abs(draws) ** k
        est = float(powered.mean())
        se = float(powered.std(ddof=1) / np.sqrt(reps))
        pred = ev_k * (4.0 * a) ** (k / 3.0) / np.abs(d.f1(d.g(a))) ** (2.0 * k / 3.0)
        points.append(ProfilePoint(a=float(a), estimate=est, se=se, prediction=float(pred)))
        kept_a.append(float(a))
        kept_est.append(est * np.abs(d.f1(d.g(a))) ** (k - 1.0))
    band_integral = float(np.trapezoid(kept_est, kept_a)) if len(kept_a) >= 2 else 0.0
    return points, band_integral
