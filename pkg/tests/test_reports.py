import json

import numpy as np
import pytest

from grenlab._common import ConfigError
from grenlab.chernoff import ArgmaxConfig, default_c_grid, estimate_chernoff
from grenlab.reports import (
    atomic_write_text,
    build_manifest,
    cached_chernoff_path,
    chernoff_from_dict,
    chernoff_to_dict,
    config_hash,
    dumps17,
    loads,
)


def test_float_round_trip_lossless():
    rng = np.random.default_rng(0)
    values = np.concatenate(
        [
            rng.standard_normal(200),
            10.0 ** rng.uniform(-300, 300, 100),
            [0.0, -0.0, 1e-308, 2.0 ** -1074, np.pi],
        ]
    )
    text = dumps17({"values": values})
    back = np.array(loads(text)["values"])
    assert np.array_equal(back, values)


def test_dumps_rejects_non_finite():
    with pytest.raises(ConfigError):
        dumps17({"x": float("nan")})
    with pytest.raises(ConfigError):
        dumps17([float("inf")])


def test_dumps_is_valid_json_and_deterministic():
    payload = {"a": [1, 2.5, "s", None, True], "b": {"nested": [0.1]}}
    t1 = dumps17(payload)
    t2 = dumps17(payload)
    assert t1 == t2
    assert json.loads(t1) == {"a": [1, 2.5, "s", None, True], "b": {"nested": [0.1]}}


def test_atomic_write(tmp_path):
    target = tmp_path / "sub" / "out.json"
    atomic_write_text(target, "hello")
    assert target.read_text() == "hello"
    # no stray temp files
    assert list(target.parent.glob("*.tmp")) == []


def test_manifest_hashes_inputs(tmp_path):
    src = tmp_path / "input.txt"
    src.write_text("0.25\n0.75\n")
    m = build_manifest("fit", {"x": 1}, 7, [src], [tmp_path / "out.json"])
    assert m["subcommand"] == "fit"
    assert len(m["inputs"][str(src)]) == 64
    assert m["seed"] == 7


def test_chernoff_round_trip():
    cfg = ArgmaxConfig(reps=200, seed=5)
    est = estimate_chernoff([1.0, 2.0], default_c_grid(1.0, 0.25), cfg)
    payload = loads(dumps17(chernoff_to_dict(est)))
    back = chernoff_from_dict(payload)
    assert back.config == est.config
    assert np.array_equal(back.c_grid, est.c_grid)
    for k in (1.0, 2.0):
        a, b = est.moment(k), back.moment(k)
        assert a.ev == b.ev
        assert a.kappa == b.kappa
        assert np.array_equal(a.cov_curve, b.cov_curve)
        assert a.kappa_halves == b.kappa_halves


def test_cache_key_stability():
    cfg = ArgmaxConfig(reps=100, seed=1)
    p1 = cached_chernoff_path(cfg, default_c_grid(), [1.0])
    p2 = cached_chernoff_path(cfg, default_c_grid(), [1.0])
    p3 = cached_chernoff_path(cfg, default_c_grid(), [2.0])
    assert p1 == p2 and p1 != p3
    assert config_hash({"a": 1.0}) != config_hash({"a": 2.0})


def test_cache_dir_env(monkeypatch, tmp_path):
    from grenlab.reports import cache_dir

    monkeypatch.setenv("GRENLAB_CACHE_DIR", str(tmp_path / "cc"))
    assert cache_dir() == tmp_path / "cc"
