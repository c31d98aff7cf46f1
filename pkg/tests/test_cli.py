import json

import numpy as np
import pytest

from grenlab.cli import main
from grenlab.reports import loads


@pytest.fixture()
def cache_env(monkeypatch, tmp_path):
    monkeypatch.setenv("GRENLAB_CACHE_DIR", str(tmp_path / "cache"))
    return tmp_path


def write_sample(path, values):
    path.write_text("\n".join(str(v) for v in values) + "\n")


def test_fit_two_point_file(tmp_path):
    inp = tmp_path / "sample.txt"
    write_sample(inp, [0.25, 0.75])
    out = tmp_path / "fit.json"
    assert main(["fit", "--input", str(inp), "--out", str(out)]) == 0
    payload = loads(out.read_text())
    assert payload["vertices"] == [[0.0, 0.0], [0.25, 0.5], [0.75, 1.0], [1.0, 1.0]]
    assert payload["values"] == [2.0, 1.0, 0.0]
    assert payload["manifest"]["subcommand"] == "fit"


def test_fit_round_trip_is_lossless(tmp_path, rng):
    inp = tmp_path / "s.txt"
    write_sample(inp, np.sort(rng.random(50)))
    out = tmp_path / "fit.json"
    main(["fit", "--input", str(inp), "--out", str(out)])
    payload = json.loads(out.read_text())
    assert payload["breakpoints"][0] == 0.0 and payload["breakpoints"][-1] == 1.0


def test_error_command_matches_library(tmp_path, capsys, linear_density):
    from grenlab.distances import ErrorSpec, lk_error
    from grenlab.grenander import EmpiricalCDF, GrenanderEstimate, fit_lcm

    vals = [0.1, 0.3, 0.5, 0.9]
    inp = tmp_path / "s.txt"
    write_sample(inp, vals)
    assert main(["error", "--input", str(inp), "--density", "linear:1.5,0.5", "--k", "2"]) == 0
    out = json.loads(capsys.readouterr().out.strip())
    e = EmpiricalCDF.from_sample(vals)
    g = GrenanderEstimate.from_majorant(fit_lcm(e))
    assert out["error"] == pytest.approx(lk_error(g, linear_density, ErrorSpec(k=2)), rel=1e-15)


def test_error_modified_eps_window_violation(tmp_path, capsys):
    inp = tmp_path / "s.txt"
    write_sample(inp, [0.1, 0.5])
    code = main(
        ["error", "--input", str(inp), "--density", "linear:1.5,0.5", "--k", "3", "--modified-eps", "0.1"]
    )
    assert code == 2
    assert "window" in capsys.readouterr().err


def test_constants_rejects_zero_reps(tmp_path, capsys, cache_env):
    code = main(
        ["constants", "--k", "1", "--density", "linear:1.5,0.5", "--reps", "0"]
    )
    assert code == 2


def test_unknown_density_is_config_error(tmp_path, capsys):
    inp = tmp_path / "s.txt"
    write_sample(inp, [0.5])
    assert main(["error", "--input", str(inp), "--density", "cauchy:1", "--k", "1"]) == 2


def test_constants_pipeline_and_cache(tmp_path, capsys, cache_env):
    out = tmp_path / "constants.json"
    args = [
        "constants", "--k", "1", "--density", "linear:1.5,0.5",
        "--reps", "300", "--seed", "3", "--out", str(out),
    ]
    assert main(args) == 0
    payload = loads(out.read_text())
    for key in ("mu_k", "sigma_k", "kappa_k", "E_absV_k", "se"):
        assert key in payload
    assert payload["per_k"]["1"]["mu_k"] == payload["mu_k"]
    cache_files = list((cache_env / "cache").glob("chernoff-*.json"))
    assert len(cache_files) == 1
    # second run consumes the cache and reproduces the output exactly
    out2 = tmp_path / "constants2.json"
    assert main(args[:-1] + [str(out2)]) == 0
    a = loads(out.read_text())
    b = loads(out2.read_text())
    a.pop("manifest"), b.pop("manifest")
    assert a == b


def test_clt_pipeline_with_render_and_check(tmp_path, capsys, cache_env):
    const_file = tmp_path / "c.json"
    assert (
        main(
            [
                "constants", "--k", "1", "--density", "linear:1.5,0.5",
                "--reps", "500", "--seed", "3", "--out", str(const_file),
            ]
        )
        == 0
    )
    report_file = tmp_path / "clt.json"
    code = main(
        [
            "clt", "--density", "linear:1.5,0.5", "--k", "1", "--n-grid", "200,400",
            "--reps", "30", "--seed", "8", "--constants", str(const_file),
            "--out", str(report_file),
        ]
    )
    assert code == 0
    payload = loads(report_file.read_text())
    assert payload["report_version"] == 1
    assert payload["per_n"]["400"]["reps"] == 30
    csv_path = report_file.with_suffix(".csv")
    header = csv_path.read_text().splitlines()[0]
    assert header == "n,replication,raw_error,T"
    svg_path = tmp_path / "clt.svg"
    assert main(["render", "--report", str(report_file), "--out", str(svg_path)]) == 0
    svg1 = svg_path.read_text()
    assert main(["render", "--report", str(report_file), "--out", str(svg_path)]) == 0
    assert svg_path.read_text() == svg1  # deterministic bytes


def test_clt_check_fails_with_wrong_constants(tmp_path, capsys, cache_env):
    # a absurd centering constant sends |T| far from normal: checks fail -> 3
    const_file = tmp_path / "c.json"
    bogus = {
        "report_version": 1,
        "per_k": {
            "1": {
                "mu_k": 25.0, "sigma_k": 0.01, "sigma_k2": 1e-4, "sigma2": 1e-4,
                "kappa_k": 0.02, "E_absV_k": 0.4,
                "se": {"mu_k": 0.0, "sigma2": 0.0, "sigma_k2": 0.0, "E_absV_k": 0.0, "kappa_k": 0.0},
            }
        },
    }
    from grenlab.reports import dumps17

    const_file.write_text(dumps17(bogus))
    report_file = tmp_path / "r.json"
    code = main(
        [
            "clt", "--density", "linear:1.5,0.5", "--k", "1", "--n-grid", "100,200",
            "--reps", "20", "--seed", "1", "--constants", str(const_file),
            "--out", str(report_file), "--check",
        ]
    )
    assert code == 3
    assert "check failed" in capsys.readouterr().err


def test_missing_constants_entry(tmp_path, capsys):
    const_file = tmp_path / "c.json"
    const_file.write_text('{"report_version":1,"per_k":{}}')
    code = main(
        [
            "clt", "--density", "linear:1.5,0.5", "--k", "1", "--n-grid", "100",
            "--reps", "5", "--seed", "1", "--constants", str(const_file),
            "--out", str(tmp_path / "r.json"),
        ]
    )
    assert code == 2
    assert "no entry for k" in capsys.readouterr().err


def test_inverse_process_csv(tmp_path):
    out = tmp_path / "ip.csv"
    code = main(
        [
            "inverse-process", "--j", "W", "--a", "1.0", "--n", "1000",
            "--reps", "5", "--density", "linear:1.5,0.5", "--seed", "2", "--out", str(out),
        ]
    )
    assert code == 0
    lines = out.read_text().splitlines()
    assert lines[0] == "J,a,n,replication,value"
    assert len(lines) == 6
    assert lines[1].startswith("W,1,1000,0,")
    assert (tmp_path / "ip.csv.manifest.json").exists()


def test_inverse_process_empirical_variant(tmp_path):
    out = tmp_path / "ipe.csv"
    assert (
        main(
            [
                "inverse-process", "--j", "E", "--a", "1.0", "--n", "500",
                "--reps", "4", "--density", "truncexp:1.0", "--seed", "2", "--out", str(out),
            ]
        )
        == 0
    )
    assert len(out.read_text().splitlines()) == 5


def test_boundary_zero_cli(tmp_path, capsys):
    out = tmp_path / "bz.json"
    code = main(
        [
            "boundary", "--variant", "zero", "--density", "linear:1.5,0.5",
            "--n-grid", "500", "--reps", "100", "--j-trunc", "5000",
            "--seed", "4", "--out", str(out),
        ]
    )
    assert code == 0
    payload = loads(out.read_text())
    assert "ks_two_sample" in payload["per_n"]["500"]


def test_diverge_cli_regime_rejection(tmp_path, capsys):
    code = main(
        [
            "diverge", "--variant", "mean", "--density", "linear:1.5,0.5", "--k", "2",
            "--n-grid", "100,200", "--reps", "10", "--seed", "1",
            "--out", str(tmp_path / "d.json"),
        ]
    )
    assert code == 2
    assert "k > 3" in capsys.readouterr().err


def test_render_schema_mismatch(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text('{"report_version": 99}')
    assert main(["render", "--report", str(bad), "--out", str(tmp_path / "x.svg")]) == 2


def test_unknown_subcommand_exits_2():
    with pytest.raises(SystemExit) as exc:
        main(["frobnicate"])
    assert exc.value.code == 2
