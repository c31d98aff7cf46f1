"""Shared plumbing: errors, deterministic RNG substreams, kernel backend flag."""

from __future__ import annotations

import os

import numpy as np

__all__ = ["ConfigError", "substream", "kernel_backend"]


class ConfigError(ValueError):
    """Invalid configuration or parameters; maps to CLI exit status 2."""


# Fixed tags keep substreams of different subsystems disjoint even when the
# same root seed and replication index are used.
STREAM_FIT = 1
STREAM_ARGMAX = 2
STREAM_LOCALIZED = 3
STREAM_GAMMA = 4
STREAM_EXPERIMENT = 5
STREAM_SCALING = 6


def substream(seed: int, *key: int) -> np.random.Generator:
    """Independent generator keyed by (seed, *key).

    Every Monte Carlo replication draws from its own substream, so results
    are a pure function of (seed, key) and never depend on scheduling or
    chunking. SeedSequence does the mixing.
    """
    return np.random.default_rng(np.random.SeedSequence((int(seed),) + tuple(int(k) for k in key)))


def kernel_backend() -> str:
    """Active hot-kernel backend: 'numba' or 'numpy'.

    Selected by the GRENLAB_KERNEL environment variable; defaults to numba
    when importable. Both backends consume randomness in the same order and
    produce bitwise-identical results.
    """
    choice = os.environ.get("GRENLAB_KERNEL", "").strip().lower()
    if choice in ("numba", "numpy"):
        return choice
    if choice:
        raise ConfigError(f"GRENLAB_KERNEL must be 'numba' or 'numpy', got {choice!r}")
    try:
        import numba  # noqa: F401
    except ImportError:
        return "numpy"
    return "numba"
