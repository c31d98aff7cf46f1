#!/usr/bin/env python3
"""Benchmark the numba kernels against the pure-numpy fallbacks.

Both backends consume randomness identically, so outputs are checked for
exact equality while timing. Run:

    python benchmarks/bench_kernels.py
"""

import time

import numpy as np

from grenlab._common import substream
from grenlab._kernels import numpy_impl

try:
    from grenlab._kernels import numba_impl
except ImportError:
    numba_impl = None


def timeit(fn, reps):
    t0 = time.perf_counter()
    for _ in range(reps):
        out = fn()
    return (time.perf_counter() - t0) / reps, out


def bench_lcm(impl, n=100_000):
    rng = np.random.default_rng(1)
    x = np.concatenate([[0.0], np.sort(rng.random(n)), [1.0]])
    y = np.concatenate([[0.0], np.arange(1, n + 1) / n, [1.0]])
    return timeit(lambda: impl.lcm_keep_mask(x, y), 20)


def bench_argmax(impl, reps=100):
    centers = np.arange(0.0, 2.01, 0.125)

    def run():
        out = []
        for i in range(reps):
            v, _, _ = impl.parabola_argmax_rep(substream(7, 0, i), 4096, 2.0 ** -10, 3, 1.0, centers)
            out.append(v)
        return np.array(out)

    dt, out = timeit(run, 1)
    return dt / reps, out


def bench_gamma(impl, reps=50):
    def run():
        return np.array([impl.gamma_ratio_sup(substream(9, 0, i), 100_000) for i in range(reps)])

    dt, out = timeit(run, 1)
    return dt / reps, out


def main():
    if numba_impl is None:
        print("numba unavailable; nothing to compare")
        return
    # warm the JIT before timing
    bench_lcm(numba_impl, n=1000)
    bench_argmax(numba_impl, reps=2)
    bench_gamma(numba_impl, reps=2)

    rows = []
    for name, bench in [
        ("lcm hull (n=1e5)", bench_lcm),
        ("drifted argmax (17 offsets, refine 3)", bench_argmax),
        ("exponential ratio sup (J=1e5)", bench_gamma),
    ]:
        t_nb, out_nb = bench(numba_impl)
        t_np, out_np = bench(numpy_impl)
        equal = np.array_equal(np.asarray(out_nb), np.asarray(out_np))
        rows.append((name, t_nb * 1e3, t_np * 1e3, t_np / t_nb, equal))

    width = max(len(r[0]) for r in rows)
    print(f"{'kernel':<{width}}  numba(ms)  numpy(ms)  speedup  bitwise-equal")
    for name, nb, npy, speedup, equal in rows:
        print(f"{name:<{width}}  {nb:9.3f}  {npy:9.3f}  {speedup:7.1f}x  {equal}")


if __name__ == "__main__":
    main()
