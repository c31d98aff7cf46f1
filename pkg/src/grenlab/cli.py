"""Command-line interface.

Subcommands: fit, error, constants, inverse-process, clt, boundary, diverge,
render. Exit status 0 on success, 2 on configuration errors, 3 when a
--check run fails its pre-registered assertions. All outputs are written
atomically and carry a manifest (inline for JSON, sidecar for CSV).
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from grenlab import chernoff as ch
from grenlab import experiments as exp
from grenlab._common import STREAM_LOCALIZED, ConfigError, substream
from grenlab.chernoff import ArgmaxConfig, LimitConstants
from grenlab.densities import DensityFamily, make_density, sample
from grenlab.distances import ErrorSpec, lk_error, modified_lk_error, standardize
from grenlab.grenander import EmpiricalCDF, GrenanderEstimate, fit_lcm
from grenlab.inverse_process import LocalizedArgmaxSpec, empirical_inverse_dev, simulate_inverse_dev
from grenlab.render import render_report
from grenlab import reports as rep

CHECK_FAIL_EXIT = 3


def _read_sample_file(path) -> np.ndarray:
    try:
        values = [float(line) for line in Path(path).read_text().split()]
    except (OSError, ValueError) as exc:
        raise ConfigError(f"cannot read sample file {path}: {exc}") from None
    if not values:
        raise ConfigError(f"sample file {path} is empty")
    return np.asarray(values)


def _parse_range(text: str) -> tuple:
    try:
        lo, hi = text.split(":")
        return float(lo), float(hi)
    except ValueError:
        raise ConfigError(f"bad range {text!r}; expected LO:HI") from None


def _parse_n_grid(text: str) -> tuple:
    try:
        return tuple(int(v) for v in text.split(","))
    except ValueError:
        raise ConfigError(f"bad n grid {text!r}; expected comma-separated integers") from None


def _write_json(path, payload: dict) -> None:
    rep.atomic_write_text(path, rep.dumps17(payload) + "\n")


def _write_report(report: exp.ExperimentReport, out_path, subcommand: str, seed: int, inputs=()) -> None:
    out_path = Path(out_path)
    csv_path = out_path.with_suffix(".csv")
    payload = report.to_json_dict()
    payload["raw_csv"] = csv_path.name
    payload["manifest"] = rep.build_manifest(
        subcommand, report.config, seed, inputs, [str(out_path), str(csv_path)]
    )
    _write_json(out_path, payload)
    lines = [",".join(report.raw_columns)]
    for row in report.raw_rows:
        lines.append(",".join(format(v, ".17g") if isinstance(v, float) else str(v) for v in row))
    rep.atomic_write_text(csv_path, "\n".join(lines) + "\n")
    _write_json(
        Path(str(csv_path) + ".manifest.json"),
        payload["manifest"],
    )


def _constants_from_file(path, k: float) -> LimitConstants:
    try:
        payload = rep.loads(Path(path).read_text())
    except OSError as exc:
        raise ConfigError(f"cannot read constants file {path}: {exc}; run `grenlab constants` first") from None
    key = format(float(k), ".17g")
    per_k = payload.get("per_k", {})
    if key not in per_k:
        raise ConfigError(f"constants file {path} has no entry for k = {k}; run `grenlab constants --k {k}`")
    c = per_k[key]
    return LimitConstants(
        k=float(k),
        mu_k=c["mu_k"],
        sigma2=c["sigma2"],
        sigma_k2=c["sigma_k2"],
        e_abs_v_k=c["E_absV_k"],
        kappa_k=c["kappa_k"],
        se_mu_k=c["se"]["mu_k"],
        se_sigma2=c["se"]["sigma2"],
        se_sigma_k2=c["se"]["sigma_k2"],
    )


def _cmd_fit(args) -> int:
    e = EmpiricalCDF.from_sample(_read_sample_file(args.input))
    majorant = fit_lcm(e)
    g = GrenanderEstimate.from_majorant(majorant)
    payload = {
        "vertices": [[float(t), float(y)] for t, y in zip(majorant.tx, majorant.ty)],
        "breakpoints": majorant.tx,
        "values": g.values,
        "n": e.n,
        "manifest": rep.build_manifest("fit", {"input": str(args.input)}, None, [args.input], [args.out]),
    }
    _write_json(args.out, payload)
    return 0


def _cmd_error(args) -> int:
    d = make_density(DensityFamily.from_cli(args.density))
    e = EmpiricalCDF.from_sample(_read_sample_file(args.input))
    g = GrenanderEstimate.from_majorant(fit_lcm(e))
    weight = None
    if args.weight == "inv-sd":
        # reciprocal of the pointwise limiting standard deviation scale
        weight = lambda x: (0.5 * d.f(x) * np.abs(d.f1(x))) ** (-1.0 / 3.0)  # noqa: E731
    if args.modified_eps is not None:
        value = modified_lk_error(g, d, args.k, args.modified_eps, e.n)
        spec_desc = {"k": args.k, "modified_eps": args.modified_eps}
    else:
        lo, hi = _parse_range(args.range)
        value = lk_error(g, d, ErrorSpec(k=args.k, lo=lo, hi=hi, weight=weight))
        spec_desc = {"k": args.k, "range": [lo, hi], "weight": args.weight}
    out = {"error": value, "n": e.n}
    if args.standardize:
        if not args.constants:
            raise ConfigError("--standardize needs --constants FILE")
        lc = _constants_from_file(args.constants, args.k)
        out["T"] = standardize(value, e.n, args.k, lc.mu_k, lc.sigma_k).value
        out["mu_k"] = lc.mu_k
        out["sigma_k"] = lc.sigma_k
    print(rep.dumps17(out))
    if args.out:
        out["manifest"] = rep.build_manifest(
            "error", spec_desc | {"density": args.density}, None, [args.input], [args.out]
        )
        _write_json(args.out, out)
    return 0


def _cmd_constants(args) -> int:
    if not args.k:
        raise ConfigError("at least one --k is required")
    fam = DensityFamily.from_cli(args.density)
    d = make_density(fam)
    cfg = ArgmaxConfig(
        horizon=args.horizon, step=args.grid, refine=args.refine, reps=args.reps, seed=args.seed
    )
    c_grid = ch.default_c_grid(args.c_max, args.c_step)
    cache_path = rep.cached_chernoff_path(cfg, c_grid, args.k)
    est = None
    if cache_path.exists() and not args.no_cache:
        est = rep.chernoff_from_dict(rep.loads(cache_path.read_text()))
    if est is None:
        est = ch.estimate_chernoff(args.k, c_grid, cfg)
        if not args.no_cache:
            _write_json(cache_path, rep.chernoff_to_dict(est))
    per_k = {}
    for k in args.k:
        lc = ch.compute_constants(d, k, est)
        m = est.moment(k)
        per_k[format(float(k), ".17g")] = {
            "mu_k": lc.mu_k,
            "sigma_k": lc.sigma_k,
            "sigma_k2": lc.sigma_k2,
            "sigma2": lc.sigma2,
            "kappa_k": lc.kappa_k,
            "E_absV_k": lc.e_abs_v_k,
            "se": {
                "mu_k": lc.se_mu_k,
                "sigma2": lc.se_sigma2,
                "sigma_k2": lc.se_sigma_k2,
                "E_absV_k": m.ev_se,
                "kappa_k": m.kappa_se,
            },
        }
    payload: dict = {"report_version": 1, "density": fam.to_config(), "per_k": per_k}
    if len(args.k) == 1:
        payload.update(per_k[format(float(args.k[0]), ".17g")])
    payload["chernoff_config"] = cfg.to_config()
    payload["manifest"] = rep.build_manifest(
        "constants",
        {"density": fam.to_config(), "k": list(args.k), "argmax": cfg.to_config()},
        args.seed,
        [],
        [args.out] if args.out else [],
    )
    text = rep.dumps17(payload)
    if args.out:
        rep.atomic_write_text(args.out, text + "\n")
    else:
        print(text)
    return 0


def _cmd_inverse_process(args) -> int:
    fam = DensityFamily.from_cli(args.density)
    d = make_density(fam)
    rows = []
    if args.j == "E":
        for i in range(args.reps):
            gen = substream(args.seed, STREAM_LOCALIZED, i)
            e = EmpiricalCDF.from_sample(sample(d, args.n, gen))
            rows.append(empirical_inverse_dev(e, d, args.a))
    else:
        spec = LocalizedArgmaxSpec(density=d, a=args.a, n=args.n, process=args.j, step=args.step, refine=args.refine)
        if not spec.depth_ok:
            print(
                f"warning: level depth margin {spec.depth_margin():.3g} < 0; "
                "localized approximation is shallow",
                file=sys.stderr,
            )
        for i in range(args.reps):
            rows.append(simulate_inverse_dev(spec, substream(args.seed, STREAM_LOCALIZED, i)))
    lines = ["J,a,n,replication,value"]
    for i, v in enumerate(rows):
        lines.append(f"{args.j},{format(args.a, '.17g')},{args.n},{i},{format(v, '.17g')}")
    rep.atomic_write_text(args.out, "\n".join(lines) + "\n")
    manifest = rep.build_manifest(
        "inverse-process",
        {"j": args.j, "a": args.a, "n": args.n, "reps": args.reps, "density": fam.to_config()},
        args.seed,
        [],
        [args.out],
    )
    _write_json(Path(str(args.out) + ".manifest.json"), manifest)
    return 0


def _finish_checked(report: exp.ExperimentReport, args, name: str) -> int:
    _write_report(report, args.out, name, args.seed, inputs=[args.constants] if getattr(args, "constants", None) else ())
    if args.check and not report.passed:
        failed = [k for k, v in report.checks.items() if isinstance(v, bool) and not v]
        print(f"check failed: {', '.join(failed)}", file=sys.stderr)
        return CHECK_FAIL_EXIT
    return 0


def _cmd_clt(args) -> int:
    fam = DensityFamily.from_cli(args.density)
    lc = _constants_from_file(args.constants, args.k)
    cfg = exp.ExperimentConfig(
        family=fam,
        k=args.k,
        n_grid=_parse_n_grid(args.n_grid),
        reps=args.reps,
        seed=args.seed,
        mode=exp.MODE_MODIFIED if args.mode == "modified" else exp.MODE_PLAIN,
        eps=args.eps,
        constants=lc,
    )
    return _finish_checked(exp.run_clt(cfg), args, "clt")


def _cmd_boundary(args) -> int:
    fam = DensityFamily.from_cli(args.density)
    if args.variant == "zero":
        cfg = exp.ExperimentConfig(
            family=fam,
            k=1.0,
            n_grid=_parse_n_grid(args.n_grid),
            reps=args.reps,
            seed=args.seed,
            mode=exp.MODE_BOUNDARY_ZERO,
            j_trunc=args.j_trunc,
        )
        return _finish_checked(exp.run_boundary_zero(cfg), args, "boundary")
    if args.alpha is None:
        raise ConfigError("boundary rate variant needs --alpha")
    cfg = exp.ExperimentConfig(
        family=fam,
        k=1.0,
        n_grid=_parse_n_grid(args.n_grid),
        reps=args.reps,
        seed=args.seed,
        mode=exp.MODE_BOUNDARY_RATE,
        alpha=args.alpha,
    )
    return _finish_checked(exp.run_boundary_rate(cfg), args, "boundary")


def _cmd_diverge(args) -> int:
    fam = DensityFamily.from_cli(args.density)
    cfg = exp.ExperimentConfig(
        family=fam,
        k=args.k,
        n_grid=_parse_n_grid(args.n_grid),
        reps=args.reps,
        seed=args.seed,
        mode=exp.MODE_DIVERGENCE,
        divergence_variant=args.variant,
        negative_control=args.control,
    )
    return _finish_checked(exp.run_divergence(cfg), args, "diverge")


def _cmd_render(args) -> int:
    payload = rep.loads(Path(args.report).read_text())
    svg = render_report(payload)
    rep.atomic_write_text(args.out, svg)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="grenlab", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("fit", help="fit the concave majorant and step density of a sample")
    p.add_argument("--input", required=True, help="newline-separated sample values in (0, 1]")
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_fit)

    p = sub.add_parser("error", help="L_k error of a fitted sample against a reference density")
    p.add_argument("--input", required=True)
    p.add_argument("--density", required=True, help="linear:F0,F1 or truncexp:THETA")
    p.add_argument("--k", type=float, required=True)
    p.add_argument("--range", default="0:1", help="integration range LO:HI")
    p.add_argument("--weight", choices=["none", "inv-sd"], default="none")
    p.add_argument("--modified-eps", type=float, default=None, help="trimmed range rate (k >= 2.5)")
    p.add_argument("--standardize", action="store_true")
    p.add_argument("--constants", default=None, help="constants JSON from `grenlab constants`")
    p.add_argument("--out", default=None)
    p.set_defaults(func=_cmd_error)

    p = sub.add_parser("constants", help="estimate limit constants by argmax simulation")
    p.add_argument("--k", type=float, action="append", required=True)
    p.add_argument("--density", required=True)
    p.add_argument("--reps", type=int, default=100_000)
    p.add_argument("--horizon", type=float, default=4.0)
    p.add_argument("--grid", type=float, default=2.0 ** -10)
    p.add_argument("--refine", type=int, default=3)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--c-max", type=float, default=2.0)
    p.add_argument("--c-step", type=float, default=0.125)
    p.add_argument("--no-cache", action="store_true")
    p.add_argument("--out", default=None)
    p.set_defaults(func=_cmd_constants)

    p = sub.add_parser("inverse-process", help="simulate localized inverse deviations (CSV)")
    p.add_argument("--j", choices=["E", "B", "W"], required=True)
    p.add_argument("--a", type=float, required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--reps", type=int, required=True)
    p.add_argument("--density", required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--step", type=float, default=2.0 ** -10)
    p.add_argument("--refine", type=int, default=3)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_inverse_process)

    p = sub.add_parser("clt", help="standardized-error experiment along an n grid")
    p.add_argument("--density", required=True)
    p.add_argument("--k", type=float, required=True)
    p.add_argument("--n-grid", required=True, help="comma-separated sample sizes")
    p.add_argument("--reps", type=int, default=2000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--mode", choices=["plain", "modified"], default="plain")
    p.add_argument("--eps", type=float, default=None)
    p.add_argument("--constants", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--check", action="store_true", help="exit 3 if registered checks fail")
    p.set_defaults(func=_cmd_clt)

    p = sub.add_parser("boundary", help="boundary behavior experiments")
    p.add_argument("--variant", choices=["zero", "rate"], required=True)
    p.add_argument("--alpha", type=float, default=None)
    p.add_argument("--density", required=True)
    p.add_argument("--n-grid", required=True)
    p.add_argument("--reps", type=int, default=2000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--j-trunc", type=int, default=100_000)
    p.add_argument("--out", required=True)
    p.add_argument("--check", action="store_true")
    p.set_defaults(func=_cmd_boundary)

    p = sub.add_parser("diverge", help="divergence of scaled errors outside the CLT regime")
    p.add_argument("--variant", choices=["mean", "near-zero-var"], required=True)
    p.add_argument("--control", action="store_true", help="run an in-regime negative control")
    p.add_argument("--density", required=True)
    p.add_argument("--k", type=float, required=True)
    p.add_argument("--n-grid", required=True)
    p.add_argument("--reps", type=int, default=1000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.add_argument("--check", action="store_true")
    p.set_defaults(func=_cmd_diverge)

    p = sub.add_parser("render", help="render a report to deterministic SVG")
    p.add_argument("--report", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_render)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
