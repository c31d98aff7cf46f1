"""Limit constants from first principles via drifted-Brownian argmax simulation.

The centering constant mu_k couples the k-th absolute moment of the argmax of
two-sided Brownian motion minus a parabola with a density integral; the
variance constants couple the integrated autocovariance of the stationary
argmax-deviation process with other density integrals. Everything here is
estimated by seeded Monte Carlo with jackknife standard errors and assembled
through independently coded formula routes so their algebraic identity can be
asserted.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np
from scipy import special

from grenlab._common import STREAM_ARGMAX, STREAM_SCALING, ConfigError, substream
from grenlab._kernels import parabola_argmax_rep
from grenlab.densities import MonotoneDensity
from grenlab.quadrature import adaptive_quad
from grenlab.stats import ks_two_sample

__all__ = [
    "ArgmaxConfig",
    "ChernoffEstimates",
    "KMoment",
    "LimitConstants",
    "ScalingCheckResult",
    "brownian_argmax",
    "simulate_V",
    "estimate_chernoff",
    "scaling_check",
    "compute_constants",
    "constants_from_moments",
    "covariance_scale_constant",
    "default_c_grid",
]

DENSITY_QUAD_TOL = 1e-12
IDENTITY_TOL = 1e-10
BOUNDARY_FRACTION_LIMIT = 1e-4


@dataclass(frozen=True)
class ArgmaxConfig:
    """Discretization and replication policy for Brownian argmax simulation.

    horizon: two-sided time truncation T; admissible only when exp(-T^3) is
    negligible (the argmax has cubic-exponential tails).
    step: coarse grid spacing; horizon must be an integer multiple.
    refine: rounds of x1/8 grid shrinking around the incumbent argmax, with
    Brownian-bridge infill so refinement never changes the path's law.
    reps / seed / rep_offset: replication count and stream keying; replication
    i draws from substream (seed, tag, rep_offset + i) regardless of
    scheduling, so results are reproducible and seed ranges can be kept
    disjoint across runs.
    """

    horizon: float = 4.0
    step: float = 2.0 ** -10
    refine: int = 3
    reps: int = 100_000
    seed: int = 0
    rep_offset: int = 0

    def __post_init__(self):
        if self.horizon <= 0 or self.step <= 0:
            raise ConfigError("horizon and step must be positive")
        if np.exp(-self.horizon ** 3) > 1e-6:
            raise ConfigError(f"horizon {self.horizon} too small for negligible truncation")
        n_half = round(self.horizon / self.step)
        if abs(n_half * self.step - self.horizon) > 1e-9 * self.horizon:
            raise ConfigError("horizon must be an integer multiple of step")
        if self.refine < 0:
            raise ConfigError("refine must be >= 0")
        if self.reps < 1:
            raise ConfigError("reps must be >= 1")

    @property
    def n_half(self) -> int:
        return round(self.horizon / self.step)

    def to_config(self) -> dict:
        return {
            "horizon": self.horizon,
            "step": self.step,
            "refine": self.refine,
            "reps": self.reps,
            "seed": self.seed,
            "rep_offset": self.rep_offset,
        }


def default_c_grid(c_max: float = 2.0, c_step: float = 0.125) -> np.ndarray:
    return np.round(np.arange(0.0, c_max + 0.5 * c_step, c_step), 12)


def brownian_argmax(c: float, cfg: ArgmaxConfig, rng: np.random.Generator, curvature: float = 1.0) -> float:
    """One draw of the rightmost maximizer of W(t) - curvature (t - c)^2."""
    v, _, _ = parabola_argmax_rep(rng, cfg.n_half, cfg.step, cfg.refine, curvature, np.array([float(c)]))
    return float(v[0])


# the argmax of the standard drifted path; alias matching the operation name
simulate_V = brownian_argmax


@dataclass(frozen=True)
class KMoment:
    """Per-exponent Monte Carlo summaries for the argmax-deviation process."""

    k: float
    ev: float  # E|V(0)|^k
    ev_se: float
    var0: float  # sample variance of |V(0)|^k, reduced independently
    cov_curve: np.ndarray  # cov(|xi(0)|^k, |xi(c)|^k) on the c grid
    cov_se: np.ndarray  # jackknife standard errors
    kappa: float  # integral of the covariance curve over [0, infinity)
    kappa_se: float
    kappa_trapz: float  # grid part (trapezoid)
    kappa_tail: float  # fitted cubic-exponential tail beyond the grid
    kappa_halves: tuple  # ((kappa, se) on first rep half, (kappa, se) on second)
    jack_cov_ev_kappa: float


@dataclass(frozen=True)
class ChernoffEstimates:
    """Monte Carlo estimates of the argmax moments and covariance integrals."""

    config: ArgmaxConfig
    c_grid: np.ndarray
    per_k: dict
    mean_v0: float
    mean_v0_se: float
    boundary_hits: int
    edge_stops: int

    def moment(self, k: float) -> KMoment:
        key = float(k)
        if key not in self.per_k:
            raise ConfigError(f"exponent {k} not covered; available: {sorted(self.per_k)}")
        return self.per_k[key]

    @property
    def boundary_fraction(self) -> float:
        return self.boundary_hits / (self.config.reps * max(1, self.c_grid.size))


def _jackknife_cov_rows(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Leave-one-out sample covariances cov_{-i}(a, b[:, j]) as an (R, nc) array."""
    r = a.size
    sx = a.sum()
    sy = b.sum(axis=0)
    sxy = a @ b
    loo = (sxy[None, :] - a[:, None] * b) - (sx - a)[:, None] * (sy[None, :] - b) / (r - 1)
    return loo / (r - 2)


def _jackknife_se(loo: np.ndarray) -> float:
    r = loo.shape[0]
    centered = loo - loo.mean(axis=0)
    return float(np.sqrt((r - 1) / r * np.sum(centered ** 2)))


def _trapz_weights(c_grid: np.ndarray) -> np.ndarray:
    w = np.zeros_like(c_grid)
    w[:-1] += 0.5 * np.diff(c_grid)
    w[1:] += 0.5 * np.diff(c_grid)
    return w


def _tail_fit(c_grid: np.ndarray, cov: np.ndarray, cov_se: np.ndarray) -> float:
    """Integrated remainder beyond the grid from a log-linear fit in c^3.

    Fits on the outer half of the covariances still resolved above their own
    noise (> 2 SE); the cubic-exponential decay model turns the remainder
    into an incomplete-gamma expression. Returns 0 when the decay is already
    below noise at the grid end (the remainder is then negligible anyway).
    """
    resolved = np.flatnonzero((cov > 0) & (cov > 2.0 * cov_se))
    if resolved.size < 4:
        return 0.0
    c_hi = c_grid[resolved[-1]]
    sel = resolved[c_grid[resolved] >= 0.5 * c_hi]
    sel = sel[c_grid[sel] > 0]
    if sel.size < 3:
        return 0.0
    x = c_grid[sel] ** 3
    y = np.log(cov[sel])
    slope, intercept = np.polyfit(x, y, 1)
    if slope >= 0:
        return 0.0
    lam = -slope
    c_max = c_grid[-1]
    u0 = lam * c_max ** 3
    return float(
        np.exp(intercept)
        / (3.0 * lam ** (1.0 / 3.0))
        * special.gamma(1.0 / 3.0)
        * special.gammaincc(1.0 / 3.0, u0)
    )


def _kappa_pieces(xi: np.ndarray, k: float, c_grid: np.ndarray, weights: np.ndarray):
    """(cov curve, trapezoid kappa, tail, total) for one exponent on one block."""
    a = np.abs(xi[:, 0]) ** k
    b = np.abs(xi) ** k
    ac = a - a.mean()
    bc = b - b.mean(axis=0)
    cov = (ac @ bc) / (a.size - 1)
    kappa_trapz = float(cov @ weights)
    cov_se_rough = np.std(ac[:, None] * bc, axis=0, ddof=1) / np.sqrt(a.size)
    tail = _tail_fit(c_grid, cov, cov_se_rough)
    return a, b, cov, kappa_trapz, tail


def estimate_chernoff(k_list, c_grid, cfg: ArgmaxConfig) -> ChernoffEstimates:
    """Simulate the argmax-deviation process on a shared path per replication
    and estimate moments, covariance curves, and their integrals.

    Within one replication the same coarse Brownian path drives every grid
    offset c (the deviation process is stationary, so the pair (0, c) is
    canonical for the covariance); bridge infill during refinement is drawn
    per offset. The c = 0 deviation is evaluated once and reused, so the
    covariance curve at c = 0 equals the sample variance exactly.
    """
    c_grid = np.asarray(c_grid, dtype=float)
    if c_grid.size < 2 or c_grid[0] != 0.0 or np.any(np.diff(c_grid) <= 0):
        raise ConfigError("c grid must start at 0 and increase")
    if cfg.horizon - c_grid[-1] < 2.0:
        raise ConfigError(
            f"horizon {cfg.horizon} leaves less than 2 time units beyond the last "
            f"offset {c_grid[-1]}; boundary truncation would not be negligible"
        )
    k_list = [float(k) for k in k_list]
    if any(k < 1 for k in k_list):
        raise ConfigError("exponents must be >= 1")
    reps = cfg.reps
    xi = np.empty((reps, c_grid.size))
    boundary_hits = 0
    edge_stops = 0
    for i in range(reps):
        gen = substream(cfg.seed, STREAM_ARGMAX, cfg.rep_offset + i)
        v, bh, es = parabola_argmax_rep(gen, cfg.n_half, cfg.step, cfg.refine, 1.0, c_grid)
        xi[i] = v - c_grid
        boundary_hits += bh
        edge_stops += es

    weights = _trapz_weights(c_grid)
    half = reps // 2
    per_k = {}
    for k in k_list:
        a, b, cov, kappa_trapz, tail = _kappa_pieces(xi, k, c_grid, weights)
        kappa = kappa_trapz + tail
        ev = float(a.mean())
        ev_se = float(a.std(ddof=1) / np.sqrt(reps))
        cov_loo = _jackknife_cov_rows(a, b)
        cov_se = np.sqrt((reps - 1) / reps * np.sum((cov_loo - cov_loo.mean(axis=0)) ** 2, axis=0))
        kappa_loo = cov_loo @ weights
        kappa_se = _jackknife_se(kappa_loo[:, None])
        ev_loo = (a.sum() - a) / (reps - 1)
        jack_cov = float(
            (reps - 1)
            / reps
            * np.sum((ev_loo - ev_loo.mean()) * (kappa_loo - kappa_loo.mean()))
        )
        halves = []
        if half >= 8:
            for block in (xi[:half], xi[half : 2 * half]):
                _, _, cov_h, ktr_h, tail_h = _kappa_pieces(block, k, c_grid, weights)
                a_h = np.abs(block[:, 0]) ** k
                loo_h = _jackknife_cov_rows(a_h, np.abs(block) ** k) @ weights
                halves.append((ktr_h + tail_h, _jackknife_se(loo_h[:, None])))
        else:
            halves = [(kappa, kappa_se), (kappa, kappa_se)]
        if cov.size and abs(cov[-1]) > 3.0 * max(cov_se[-1], 1e-300):
            warnings.warn(
                f"covariance at c = {c_grid[-1]} still {cov[-1]:.3g} "
                f"(> 3 SE from 0); widen the c grid",
                stacklevel=2,
            )
        per_k[k] = KMoment(
            k=k,
            ev=ev,
            ev_se=ev_se,
            var0=float(a.var(ddof=1)),
            cov_curve=cov,
            cov_se=cov_se,
            kappa=kappa,
            kappa_se=kappa_se,
            kappa_trapz=kappa_trapz,
            kappa_tail=tail,
            kappa_halves=tuple(halves),
            jack_cov_ev_kappa=jack_cov,
        )

    v0 = xi[:, 0]
    est = ChernoffEstimates(
        config=cfg,
        c_grid=c_grid,
        per_k=per_k,
        mean_v0=float(v0.mean()),
        mean_v0_se=float(v0.std(ddof=1) / np.sqrt(reps)),
        boundary_hits=boundary_hits,
        edge_stops=edge_stops,
    )
    if est.boundary_fraction > BOUNDARY_FRACTION_LIMIT:
        warnings.warn(
            f"boundary argmax fraction {est.boundary_fraction:.2e} exceeds {BOUNDARY_FRACTION_LIMIT}",
            stacklevel=2,
        )
    return est


@dataclass(frozen=True)
class ScalingCheckResult:
    ks_distance: float
    p_value: float
    reps_per_side: int
    mean_direct: float
    mean_scaled: float


def scaling_check(b: float, c: float, cfg: ArgmaxConfig) -> ScalingCheckResult:
    """Two-sample comparison of the curvature-b argmax law with its rescaling.

    Simulates argmax{W(t) - b (t - c)^2} directly, and independently via the
    Brownian scaling map b^{-2/3} argmax{W(t) - (t - c b^{2/3})^2}. The two
    laws are equal, so the Kolmogorov-Smirnov distance measures discretization
    bias only.
    """
    if b <= 0:
        raise ConfigError("curvature must be positive")
    direct = np.empty(cfg.reps)
    scaled = np.empty(cfg.reps)
    shift = np.array([c * b ** (2.0 / 3.0)])
    center = np.array([float(c)])
    scale = b ** (-2.0 / 3.0)
    for i in range(cfg.reps):
        gen = substream(cfg.seed, STREAM_SCALING, cfg.rep_offset + i, 0)
        v, _, _ = parabola_argmax_rep(gen, cfg.n_half, cfg.step, cfg.refine, float(b), center)
        direct[i] = v[0]
        gen = substream(cfg.seed, STREAM_SCALING, cfg.rep_offset + i, 1)
        v, _, _ = parabola_argmax_rep(gen, cfg.n_half, cfg.step, cfg.refine, 1.0, shift)
        scaled[i] = scale * v[0]
    ks, p = ks_two_sample(direct, scaled)
    return ScalingCheckResult(
        ks_distance=ks,
        p_value=p,
        reps_per_side=cfg.reps,
        mean_direct=float(direct.mean()),
        mean_scaled=float(scaled.mean()),
    )


@dataclass(frozen=True)
class LimitConstants:
    """Assembled limit constants for one (density, exponent) pair.

    mu_k and sigma2 follow their defining displays; sigma_k2 is computed from
    its own display (an independent code path), and the delta-method identity
    sigma_k2 = sigma2 / (k^2 mu_k^{2k-2}) is asserted to 1e-10 on
    construction. Standard errors are first-order propagations of the Monte
    Carlo uncertainty in (E|V(0)|^k, kappa_k) including their jackknife
    covariance.
    """

    k: float
    mu_k: float
    sigma2: float
    sigma_k2: float
    e_abs_v_k: float
    kappa_k: float
    se_mu_k: float = 0.0
    se_sigma2: float = 0.0
    se_sigma_k2: float = 0.0
    weighted: bool = False

    @property
    def sigma_k(self) -> float:
        return float(np.sqrt(self.sigma_k2))


def constants_from_moments(
    d: MonotoneDensity,
    k: float,
    ev_k: float,
    kappa_k: float,
    ev_se: float = 0.0,
    kappa_se: float = 0.0,
    cov_ev_kappa: float = 0.0,
    weight: Optional[Callable] = None,
) -> LimitConstants:
    """Assemble limit constants from the argmax moment and covariance integral.

    With weight w, the natural generalization feeds w into the centering
    integrand and w^2 into the variance integrands; this extension is an
    extrapolation beyond the unweighted statement and is flagged as such.
    """
    if ev_k <= 0 or kappa_k <= 0:
        raise ConfigError("moment and covariance integral must be positive")
    k = float(k)
    w = (lambda x: np.ones_like(np.asarray(x, float))) if weight is None else weight

    # centering: mu_k = {E|V|^k * integral of (4 f |f'|)^{k/3} w}^{1/k}
    i_center = adaptive_quad(
        lambda x: (4.0 * d.f(x) * np.abs(d.f1(x))) ** (k / 3.0) * w(x), 0.0, 1.0, DENSITY_QUAD_TOL
    )
    mu_k = (ev_k * i_center) ** (1.0 / k)

    # level-domain variance: sigma2 = 2 * integral of (4 f)^{(2k+1)/3} |f'|^{(2k-2)/3} w^2 * kappa
    i_level = adaptive_quad(
        lambda x: (4.0 * d.f(x)) ** ((2.0 * k + 1.0) / 3.0)
        * np.abs(d.f1(x)) ** ((2.0 * k - 2.0) / 3.0)
        * w(x) ** 2,
        0.0,
        1.0,
        DENSITY_QUAD_TOL,
    )
    sigma2 = 2.0 * i_level * kappa_k

    # direct route for sigma_k2 with the 4-factors distributed per its display
    i_num = adaptive_quad(
        lambda x: d.f(x) ** ((2.0 * k + 1.0) / 3.0)
        * np.abs(d.f1(x)) ** ((2.0 * k - 2.0) / 3.0)
        * w(x) ** 2,
        0.0,
        1.0,
        DENSITY_QUAD_TOL,
    )
    i_den = adaptive_quad(
        lambda x: (d.f(x) * np.abs(d.f1(x))) ** (k / 3.0) * w(x), 0.0, 1.0, DENSITY_QUAD_TOL
    )
    sigma_k2 = i_num / (k ** 2 * (ev_k * i_den) ** ((2.0 * k - 2.0) / k)) * 8.0 * kappa_k

    via_delta = sigma2 / (k ** 2 * mu_k ** (2.0 * k - 2.0))
    if abs(sigma_k2 - via_delta) > IDENTITY_TOL * max(1.0, abs(sigma_k2)):
        raise RuntimeError(
            f"variance identity violated: direct {sigma_k2!r} vs delta-method {via_delta!r}"
        )

    # first-order uncertainty from (ev, kappa) with their covariance
    se_mu = mu_k / k * (ev_se / ev_k)
    se_sigma2 = 2.0 * i_level * kappa_se
    d_kappa = sigma_k2 / kappa_k
    d_ev = -sigma_k2 * (2.0 * k - 2.0) / k / ev_k
    var_sk2 = (
        (d_kappa * kappa_se) ** 2 + (d_ev * ev_se) ** 2 + 2.0 * d_kappa * d_ev * cov_ev_kappa
    )
    return LimitConstants(
        k=k,
        mu_k=float(mu_k),
        sigma2=float(sigma2),
        sigma_k2=float(sigma_k2),
        e_abs_v_k=float(ev_k),
        kappa_k=float(kappa_k),
        se_mu_k=float(se_mu),
        se_sigma2=float(se_sigma2),
        se_sigma_k2=float(np.sqrt(max(var_sk2, 0.0))),
        weighted=weight is not None,
    )


def compute_constants(d: MonotoneDensity, k: float, ch: ChernoffEstimates, weight=None) -> LimitConstants:
    """Limit constants for (d, k) from estimated argmax moments."""
    m = ch.moment(k)
    return constants_from_moments(
        d,
        k,
        ev_k=m.ev,
        kappa_k=m.kappa,
        ev_se=m.ev_se,
        kappa_se=m.kappa_se,
        cov_ev_kappa=m.jack_cov_ev_kappa,
        weight=weight,
    )


def covariance_scale_constant(d: MonotoneDensity, l: int, m: float, h: Callable) -> float:
    """Density-side constant scaling the covariance integral in the variance
    limit of level-domain functionals with kernel h:

        2 * integral of (4 f)^{(2l+2m+1)/3} |f'|^{(4-4l-4m)/3} h(f(x))^2 dx.
    """
    if l + m <= 0:
        raise ConfigError("requires l + m > 0")
    p = (2.0 * l + 2.0 * m + 1.0) / 3.0
    q = (4.0 - 4.0 * l - 4.0 * m) / 3.0
    return 2.0 * adaptive_quad(
        lambda x: (4.0 * d.f(x)) ** p * np.abs(d.f1(x)) ** q * h(d.f(x)) ** 2,
        0.0,
        1.0,
        DENSITY_QUAD_TOL,
    )
