"""Seeded Monte Carlo experiments confronting the limit theorems.

Each runner draws samples, fits the step density, evaluates an error
functional, and summarizes the replication distribution per sample size. All
randomness is keyed by (seed, stream tag, n, replication), so a report is a
pure function of its configuration; the timing block is the only
non-deterministic field. Pre-registered thresholds are written into every
report before any data are seen.
"""

from __future__ import annotations

import time
from dataclasses import dataclass
from typing import Optional

import numpy as np

from grenlab._common import (
    STREAM_EXPERIMENT,
    STREAM_GAMMA,
    STREAM_SCALING,
    ConfigError,
    substream,
)
from grenlab._kernels import gamma_ratio_sup, parabola_argmax_rep
from grenlab.chernoff import LimitConstants
from grenlab.densities import DensityFamily, MonotoneDensity, make_density, sample
from grenlab.distances import ErrorSpec, lk_error, modified_eps_window, modified_lk_error, standardize
from grenlab.grenander import EmpiricalCDF, GrenanderEstimate, eval_fhat, fit_lcm, inverse_un
from grenlab.stats import ks_normal, ks_two_sample, skewness

__all__ = [
    "MODE_PLAIN",
    "MODE_MODIFIED",
    "MODE_BOUNDARY_ZERO",
    "MODE_BOUNDARY_RATE",
    "MODE_DIVERGENCE",
    "THRESHOLDS",
    "ExperimentConfig",
    "ExperimentReport",
    "run_clt",
    "run_boundary_zero",
    "run_boundary_rate",
    "run_divergence",
    "boundary_integral_magnitude",
]

MODE_PLAIN = "plain"
MODE_MODIFIED = "modified"
MODE_BOUNDARY_ZERO = "boundary-zero"
MODE_BOUNDARY_RATE = "boundary-rate"
MODE_DIVERGENCE = "divergence"

REPORT_VERSION = 1

# Pre-registered acceptance thresholds, written into every report. The limit
# statements themselves carry no rates at desk scale; these calibrations are
# fixed here, never tuned per run.
THRESHOLDS = {
    "ks_alpha": 0.01,  # significance for all KS-based checks
    "growth_factor": 1.5,  # required per-decade growth in divergence checks
    "control_rel_gap": 0.20,  # max relative gap between final decade means (control)
    "variance_stability_factor": 3.0,  # allowed variance ratio between decades
    "final_ks_max": 0.1,  # KS distance to normal at the largest n
}


@dataclass(frozen=True)
class ExperimentConfig:
    """Configuration for one experiment; validated against its mode's regime."""

    family: DensityFamily
    k: float
    n_grid: tuple
    reps: int
    seed: int
    mode: str
    eps: Optional[float] = None  # modified error trimming rate
    alpha: Optional[float] = None  # boundary location exponent
    j_trunc: int = 100_000  # partial-sum truncation for the boundary-zero law
    divergence_variant: str = "mean"  # "mean" or "near-zero-var"
    negative_control: bool = False
    constants: Optional[LimitConstants] = None

    def __post_init__(self):
        if self.mode not in (MODE_PLAIN, MODE_MODIFIED, MODE_BOUNDARY_ZERO, MODE_BOUNDARY_RATE, MODE_DIVERGENCE):
            raise ConfigError(f"unknown mode {self.mode!r}")
        if self.reps < 1:
            raise ConfigError("reps must be >= 1")
        n_grid = tuple(int(n) for n in self.n_grid)
        if len(n_grid) == 0 or any(b <= a for a, b in zip(n_grid, n_grid[1:])):
            raise ConfigError("n grid must be nonempty and increasing")
        object.__setattr__(self, "n_grid", n_grid)
        if self.mode == MODE_PLAIN and not (1.0 <= self.k < 2.5):
            raise ConfigError(f"plain mode requires 1 <= k < 2.5, got k = {self.k}")
        if self.mode == MODE_MODIFIED:
            win = modified_eps_window(self.k)  # also enforces k >= 2.5
            eps = self.eps if self.eps is not None else 0.5 * (win[0] + win[1])
            if not (win[0] < eps < win[1]):
                raise ConfigError(f"eps = {eps} outside the admissible window {win}")
            object.__setattr__(self, "eps", float(eps))
        if self.mode == MODE_BOUNDARY_RATE:
            if self.alpha is None or not (0.0 < self.alpha < 1.0):
                raise ConfigError("boundary-rate mode needs alpha in (0, 1)")
        if self.mode == MODE_DIVERGENCE:
            if self.divergence_variant not in ("mean", "near-zero-var"):
                raise ConfigError(f"unknown divergence variant {self.divergence_variant!r}")
            if not self.negative_control:
                if self.divergence_variant == "mean" and not self.k > 3.0:
                    raise ConfigError("the scaled mean diverges only for k > 3; use --control otherwise")
                if self.divergence_variant == "near-zero-var" and not self.k > 2.5:
                    raise ConfigError("the near-zero variance diverges only for k > 2.5; use --control otherwise")
        if self.k < 1:
            raise ConfigError("k must be >= 1")

    def density(self) -> MonotoneDensity:
        return make_density(self.family)

    def to_config(self) -> dict:
        out = {
            "mode": self.mode,
            "density": self.family.to_config(),
            "k": self.k,
            "n_grid": list(self.n_grid),
            "reps": self.reps,
            "seed": self.seed,
        }
        if self.eps is not None:
            out["eps"] = self.eps
        if self.alpha is not None:
            out["alpha"] = self.alpha
        if self.mode == MODE_BOUNDARY_ZERO:
            out["j_trunc"] = self.j_trunc
        if self.mode == MODE_DIVERGENCE:
            out["variant"] = self.divergence_variant
            out["negative_control"] = self.negative_control
        if self.constants is not None:
            out["constants"] = {
                "k": self.constants.k,
                "mu_k": self.constants.mu_k,
                "sigma_k": self.constants.sigma_k,
            }
        return out


@dataclass
class ExperimentReport:
    """Full record of one experiment: config snapshot, pre-registered
    thresholds, per-n summaries, lossless raw replication values, check
    outcomes, and timing (the one block excluded from determinism)."""

    mode: str
    config: dict
    thresholds: dict
    per_n: dict
    raw_columns: list
    raw_rows: list
    checks: dict
    timing: dict
    report_version: int = REPORT_VERSION

    def to_json_dict(self) -> dict:
        return {
            "report_version": self.report_version,
            "mode": self.mode,
            "config": self.config,
            "thresholds": self.thresholds,
            "per_n": {str(n): summary for n, summary in self.per_n.items()},
            "raw_columns": self.raw_columns,
            "raw_rows": self.raw_rows,
            "checks": self.checks,
            "timing": self.timing,
        }

    @property
    def passed(self) -> bool:
        return all(v for v in self.checks.values() if isinstance(v, bool))


def _fit(cfg: ExperimentConfig, d: MonotoneDensity, n: int, rep: int):
    gen = substream(cfg.seed, STREAM_EXPERIMENT, n, rep)
    e = EmpiricalCDF.from_sample(sample(d, n, gen))
    return e, GrenanderEstimate.from_majorant(fit_lcm(e))


def _strictly_decreasing(xs) -> bool:
    return all(b < a for a, b in zip(xs, xs[1:]))


def run_clt(cfg: ExperimentConfig) -> ExperimentReport:
    """Standardized-error distribution along the n grid (plain or trimmed).

    Per replication: draw, fit, integrate the (possibly trimmed) error, and
    standardize with the supplied limit constants. Checks record whether
    |mean T|, |var T - 1| and the KS distance to the standard normal all
    strictly decrease along the grid, and whether the final KS distance is
    below the registered cap.
    """
    if cfg.mode not in (MODE_PLAIN, MODE_MODIFIED):
        raise ConfigError("run_clt handles plain and modified modes")
    if cfg.constants is None:
        raise ConfigError("limit constants missing; run the constants command first")
    lc = cfg.constants
    d = cfg.density()
    t0 = time.time()
    per_n = {}
    rows = []
    for n in cfg.n_grid:
        t_vals = np.empty(cfg.reps)
        for rep in range(cfg.reps):
            _, g = _fit(cfg, d, n, rep)
            if cfg.mode == MODE_PLAIN:
                err = lk_error(g, d, ErrorSpec(k=cfg.k))
            else:
                err = modified_lk_error(g, d, cfg.k, cfg.eps, n)
            stat = standardize(err, n, cfg.k, lc.mu_k, lc.sigma_k)
            t_vals[rep] = stat.value
            rows.append([n, rep, stat.raw, stat.value])
        ks, ks_p = ks_normal(t_vals)
        per_n[n] = {
            "mean_T": float(t_vals.mean()),
            "var_T": float(t_vals.var(ddof=1)),
            "skew_T": skewness(t_vals),
            "ks_normal": ks,
            "ks_pvalue": ks_p,
            "reps": cfg.reps,
        }
    means = [abs(per_n[n]["mean_T"]) for n in cfg.n_grid]
    var_gaps = [abs(per_n[n]["var_T"] - 1.0) for n in cfg.n_grid]
    ks_dists = [per_n[n]["ks_normal"] for n in cfg.n_grid]
    checks = {
        "abs_mean_decreasing": _strictly_decreasing(means),
        "var_gap_decreasing": _strictly_decreasing(var_gaps),
        "ks_decreasing": _strictly_decreasing(ks_dists),
        "final_ks_below_cap": ks_dists[-1] < THRESHOLDS["final_ks_max"],
        "abs_mean_path": means,
        "var_gap_path": var_gaps,
        "ks_path": ks_dists,
    }
    return ExperimentReport(
        mode=cfg.mode,
        config=cfg.to_config(),
        thresholds=dict(THRESHOLDS),
        per_n=per_n,
        raw_columns=["n", "replication", "raw_error", "T"],
        raw_rows=rows,
        checks=checks,
        timing={"wall_seconds": time.time() - t0},
    )


def run_boundary_zero(cfg: ExperimentConfig) -> ExperimentReport:
    """Estimator-to-density ratio at zero against the partial-sum sup law.

    Simulates fhat_n(0) / f(0) per replication and, independently,
    sup_{j <= J} j / Gamma_j with Gamma_j partial sums of standard
    exponentials; reports the two-sample KS distance per n.
    """
    if cfg.mode != MODE_BOUNDARY_ZERO:
        raise ConfigError("config mode must be boundary-zero")
    d = cfg.density()
    f0 = d.f_at_0
    t0 = time.time()
    sups = np.empty(cfg.reps)
    for rep in range(cfg.reps):
        sups[rep] = gamma_ratio_sup(substream(cfg.seed, STREAM_GAMMA, rep), cfg.j_trunc)
    per_n = {}
    rows = [[0, rep, "sup", float(s)] for rep, s in enumerate(sups)]
    for n in cfg.n_grid:
        ratios = np.empty(cfg.reps)
        for rep in range(cfg.reps):
            _, g = _fit(cfg, d, n, rep)
            ratios[rep] = float(g.values[0]) / f0
            rows.append([n, rep, "ratio", ratios[rep]])
        ks, p = ks_two_sample(ratios, sups)
        per_n[n] = {
            "ks_two_sample": ks,
            "ks_pvalue": p,
            "mean_ratio": float(ratios.mean()),
            "mean_sup": float(sups.mean()),
            "reps": cfg.reps,
        }
    checks = {
        f"no_rejection_n{n}": per_n[n]["ks_pvalue"] >= THRESHOLDS["ks_alpha"] for n in cfg.n_grid
    }
    return ExperimentReport(
        mode=cfg.mode,
        config=cfg.to_config(),
        thresholds=dict(THRESHOLDS),
        per_n=per_n,
        raw_columns=["n", "replication", "kind", "value"],
        raw_rows=rows,
        checks=checks,
        timing={"wall_seconds": time.time() - t0},
    )


def run_boundary_rate(cfg: ExperimentConfig) -> ExperimentReport:
    """Scaled deviation of the estimator at the moving point n^{-alpha}.

    For 1/3 <= alpha < 1 the n^{(1-alpha)/2}-scaled deviation has a
    nondegenerate limit: the check asserts its variance stabilizes along the
    grid (consecutive ratios within the registered factor). For
    0 < alpha < 1/3 the n^{1/3}-scaled deviation approaches the law of
    |4 f(0) f'(0)|^{1/3} V(0); the check asserts the two-sample KS distance
    to simulated argmax draws decreases along the grid.
    """
    if cfg.mode != MODE_BOUNDARY_RATE:
        raise ConfigError("config mode must be boundary-rate")
    alpha = float(cfg.alpha)
    d = cfg.density()
    t0 = time.time()
    inner_regime = alpha < 1.0 / 3.0
    per_n = {}
    rows = []
    ref = None
    if inner_regime:
        scale = abs(4.0 * d.f_at_0 * float(d.f1(0.0))) ** (1.0 / 3.0)
        ref = np.empty(cfg.reps)
        centers = np.array([0.0])
        for rep in range(cfg.reps):
            v, _, _ = parabola_argmax_rep(
                substream(cfg.seed, STREAM_SCALING, rep), 4096, 2.0 ** -10, 3, 1.0, centers
            )
            ref[rep] = scale * v[0]
    for n in cfg.n_grid:
        x_n = float(n) ** -alpha
        rate = float(n) ** (1.0 / 3.0) if inner_regime else float(n) ** ((1.0 - alpha) / 2.0)
        stats = np.empty(cfg.reps)
        for rep in range(cfg.reps):
            _, g = _fit(cfg, d, n, rep)
            stats[rep] = rate * (float(eval_fhat(g, x_n)) - float(d.f(x_n)))
            rows.append([n, rep, stats[rep]])
        summary = {"variance": float(stats.var(ddof=1)), "mean": float(stats.mean()), "reps": cfg.reps}
        if inner_regime:
            ks, p = ks_two_sample(stats, ref)
            summary["ks_to_limit"] = ks
            summary["ks_pvalue"] = p
        per_n[n] = summary
    if inner_regime:
        ks_path = [per_n[n]["ks_to_limit"] for n in cfg.n_grid]
        checks = {"ks_to_limit_decreasing": _strictly_decreasing(ks_path), "ks_path": ks_path}
    else:
        variances = [per_n[n]["variance"] for n in cfg.n_grid]
        factor = THRESHOLDS["variance_stability_factor"]
        ratios = [b / a for a, b in zip(variances, variances[1:])]
        checks = {
            "variance_stable": all(1.0 / factor <= r <= factor for r in ratios),
            "variance_path": variances,
        }
    return ExperimentReport(
        mode=cfg.mode,
        config=cfg.to_config(),
        thresholds=dict(THRESHOLDS),
        per_n=per_n,
        raw_columns=["n", "replication", "scaled_deviation"],
        raw_rows=rows,
        checks=checks,
        timing={"wall_seconds": time.time() - t0},
    )


def run_divergence(cfg: ExperimentConfig) -> ExperimentReport:
    """Growth (or convergence, for the negative control) of scaled errors.

    variant "mean": n^{k/3} times the Monte Carlo mean of the full error per
    n; diverges for k > 3. variant "near-zero-var": variance of
    n^{(2k+1)/6} times the error integral over [0, 1/(2 n f(0))]; diverges
    for k > 2.5. With negative_control the check flips to convergence of the
    scaled mean (final two decades within the registered relative gap).
    """
    if cfg.mode != MODE_DIVERGENCE:
        raise ConfigError("config mode must be divergence")
    d = cfg.density()
    t0 = time.time()
    per_n = {}
    rows = []
    for n in cfg.n_grid:
        vals = np.empty(cfg.reps)
        z_n = 1.0 / (2.0 * n * d.f_at_0)
        for rep in range(cfg.reps):
            _, g = _fit(cfg, d, n, rep)
            if cfg.divergence_variant == "mean":
                vals[rep] = float(n) ** (cfg.k / 3.0) * lk_error(g, d, ErrorSpec(k=cfg.k))
            else:
                vals[rep] = float(n) ** ((2.0 * cfg.k + 1.0) / 6.0) * lk_error(
                    g, d, ErrorSpec(k=cfg.k, lo=0.0, hi=z_n)
                )
            rows.append([n, rep, vals[rep]])
        per_n[n] = {
            "scaled_mean": float(vals.mean()),
            "scaled_variance": float(vals.var(ddof=1)),
            "reps": cfg.reps,
        }
    key = "scaled_mean" if cfg.divergence_variant == "mean" else "scaled_variance"
    path = [per_n[n][key] for n in cfg.n_grid]
    growth = [b / a for a, b in zip(path, path[1:])]
    if cfg.negative_control:
        final_gap = abs(path[-1] - path[-2]) / abs(path[-2]) if len(path) >= 2 else 0.0
        checks = {
            "control_converges": final_gap <= THRESHOLDS["control_rel_gap"],
            "final_rel_gap": final_gap,
            "path": path,
        }
    else:
        checks = {
            "grows_every_decade": all(r >= THRESHOLDS["growth_factor"] for r in growth),
            "growth_factors": growth,
            "path": path,
        }
    return ExperimentReport(
        mode=cfg.mode,
        config=cfg.to_config(),
        thresholds=dict(THRESHOLDS),
        per_n=per_n,
        raw_columns=["n", "replication", "scaled_value"],
        raw_rows=rows,
        checks=checks,
        timing={"wall_seconds": time.time() - t0},
    )


def boundary_integral_magnitude(cfg: ExperimentConfig) -> ExperimentReport:
    """Scaled error mass outside the level band along the n grid.

    Records n^{(2k+1)/6} times the error integrals over [0, U_n(f(0))] and
    [U_n(f(1)), 1]; both vanish faster than the global error fluctuation, so
    the empirical 95th percentile of their sum should fall along the grid.
    """
    if not (1.0 <= cfg.k < 2.5):
        raise ConfigError("boundary integrals are checked in the regime 1 <= k < 2.5")
    d = cfg.density()
    t0 = time.time()
    per_n = {}
    rows = []
    for n in cfg.n_grid:
        scaled = np.empty(cfg.reps)
        rate = float(n) ** ((2.0 * cfg.k + 1.0) / 6.0)
        for rep in range(cfg.reps):
            e, g = _fit(cfg, d, n, rep)
            u_hi = inverse_un(e, d.f_at_0)
            u_lo = inverse_un(e, d.f_at_1)
            left = lk_error(g, d, ErrorSpec(k=cfg.k, lo=0.0, hi=u_hi)) if u_hi > 0 else 0.0
            right = lk_error(g, d, ErrorSpec(k=cfg.k, lo=u_lo, hi=1.0)) if u_lo < 1 else 0.0
            scaled[rep] = rate * (left + right)
            rows.append([n, rep, rate * left, rate * right])
        per_n[n] = {
            "p95": float(np.quantile(scaled, 0.95)),
            "mean": float(scaled.mean()),
            "reps": cfg.reps,
        }
    p95_path = [per_n[n]["p95"] for n in cfg.n_grid]
    checks = {"p95_decreasing": _strictly_decreasing(p95_path), "p95_path": p95_path}
    return ExperimentReport(
        mode="boundary-integrals",
        config=cfg.to_config(),
        thresholds=dict(THRESHOLDS),
        per_n=per_n,
        raw_columns=["n", "replication", "scaled_left", "scaled_right"],
        raw_rows=rows,
        checks=checks,
        timing={"wall_seconds": time.time() - t0},
    )
