"""Serialization, manifests, atomic output, and the constants cache.

All floats are written with 17 significant digits so every 64-bit value
round-trips losslessly; the writer is deterministic (no timestamps inside
payloads, stable key order as constructed). Outputs are written to a
temporary file in the destination directory and renamed into place, so a
killed run never leaves a partial file at the final path.
"""

from __future__ import annotations

import hashlib
import json
import os
import tempfile
from pathlib import Path

import numpy as np

import grenlab
from grenlab._common import ConfigError
from grenlab.chernoff import ArgmaxConfig, ChernoffEstimates, KMoment

__all__ = [
    "dumps17",
    "loads",
    "atomic_write_text",
    "build_manifest",
    "cache_dir",
    "config_hash",
    "chernoff_to_dict",
    "chernoff_from_dict",
    "cached_chernoff_path",
]


def _encode(obj, out: list) -> None:
    if obj is None or obj is True or obj is False:
        out.append("null" if obj is None else ("true" if obj else "false"))
    elif isinstance(obj, str):
        out.append(json.dumps(obj))
    elif isinstance(obj, (int, np.integer)) and not isinstance(obj, bool):
        out.append(str(int(obj)))
    elif isinstance(obj, (float, np.floating)):
        x = float(obj)
        if not np.isfinite(x):
            raise ConfigError(f"cannot serialize non-finite float {x}")
        text = format(x, ".17g")
        if not any(ch in text for ch in ".eE"):
            text += ".0"  # keep float-ness through a JSON round trip
        out.append(text)
    elif isinstance(obj, dict):
        out.append("{")
        for i, (key, value) in enumerate(obj.items()):
            if not isinstance(key, str):
                raise ConfigError(f"JSON object keys must be strings, got {type(key)}")
            if i:
                out.append(",")
            out.append(json.dumps(key))
            out.append(":")
            _encode(value, out)
        out.append("}")
    elif isinstance(obj, (list, tuple)) or isinstance(obj, np.ndarray):
        seq = obj.tolist() if isinstance(obj, np.ndarray) else obj
        out.append("[")
        for i, value in enumerate(seq):
            if i:
                out.append(",")
            _encode(value, out)
        out.append("]")
    else:
        raise ConfigError(f"cannot serialize {type(obj)}")


def dumps17(obj) -> str:
    """Deterministic JSON with lossless 17-significant-digit floats."""
    out: list = []
    _encode(obj, out)
    return "".join(out)


def loads(text: str):
    return json.loads(text)


def atomic_write_text(path, text: str) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w") as handle:
            handle.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def sha256_file(path) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as handle:
        for chunk in iter(lambda: handle.read(1 << 16), b""):
            digest.update(chunk)
    return digest.hexdigest()


def build_manifest(subcommand: str, config: dict, seed, input_paths=(), output_paths=()) -> dict:
    """Run provenance: subcommand, config snapshot, seed, input hashes and
    output paths. A manifest plus the package reproduces the run."""
    return {
        "subcommand": subcommand,
        "artifact_version": grenlab.__version__,
        "seed": seed,
        "config": config,
        "inputs": {str(p): sha256_file(p) for p in input_paths},
        "outputs": [str(p) for p in output_paths],
    }


def cache_dir() -> Path:
    env = os.environ.get("GRENLAB_CACHE_DIR")
    if env:
        return Path(env)
    return Path.home() / ".cache" / "grenlab"


def config_hash(config: dict) -> str:
    return hashlib.sha256(dumps17(config).encode()).hexdigest()[:16]


def chernoff_to_dict(est: ChernoffEstimates) -> dict:
    return {
        "report_version": 1,
        "config": est.config.to_config(),
        "c_grid": est.c_grid,
        "mean_v0": est.mean_v0,
        "mean_v0_se": est.mean_v0_se,
        "boundary_hits": est.boundary_hits,
        "edge_stops": est.edge_stops,
        "per_k": {
            format(k, ".17g"): {
                "ev": m.ev,
                "ev_se": m.ev_se,
                "var0": m.var0,
                "cov_curve": m.cov_curve,
                "cov_se": m.cov_se,
                "kappa": m.kappa,
                "kappa_se": m.kappa_se,
                "kappa_trapz": m.kappa_trapz,
                "kappa_tail": m.kappa_tail,
                "kappa_halves": [list(h) for h in m.kappa_halves],
                "jack_cov_ev_kappa": m.jack_cov_ev_kappa,
            }
            for k, m in est.per_k.items()
        },
    }


def chernoff_from_dict(payload: dict) -> ChernoffEstimates:
    cfg = payload["config"]
    per_k = {}
    for key, m in payload["per_k"].items():
        k = float(key)
        per_k[k] = KMoment(
            k=k,
            ev=m["ev"],
            ev_se=m["ev_se"],
            var0=m["var0"],
            cov_curve=np.asarray(m["cov_curve"], dtype=float),
            cov_se=np.asarray(m["cov_se"], dtype=float),
            kappa=m["kappa"],
            kappa_se=m["kappa_se"],
            kappa_trapz=m["kappa_trapz"],
            kappa_tail=m["kappa_tail"],
            kappa_halves=tuple(tuple(h) for h in m["kappa_halves"]),
            jack_cov_ev_kappa=m["jack_cov_ev_kappa"],
        )
    return ChernoffEstimates(
        config=ArgmaxConfig(**cfg),
        c_grid=np.asarray(payload["c_grid"], dtype=float),
        per_k=per_k,
        mean_v0=payload["mean_v0"],
        mean_v0_se=payload["mean_v0_se"],
        boundary_hits=payload["boundary_hits"],
        edge_stops=payload["edge_stops"],
    )


def cached_chernoff_path(cfg: ArgmaxConfig, c_grid, k_list) -> Path:
    key = {
        "argmax": cfg.to_config(),
        "c_grid": list(np.asarray(c_grid, dtype=float)),
        "k_list": [float(k) for k in k_list],
    }
    return cache_dir() / f"chernoff-{config_hash(key)}.json"
