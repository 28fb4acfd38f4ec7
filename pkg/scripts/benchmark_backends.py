#!/usr/bin/env python3
"""Benchmark the Monte Carlo eigensolver backends (numba JIT vs pure numpy).

Times the batched Hermitian eigenvalue kernel on Gram matrices of the sizes
the sampler actually produces, plus one end-to-end sampling run per backend.

Usage: python3 scripts/benchmark_backends.py [--samples N]
"""

import argparse
import time
import warnings

import numpy as np

from ncwishart._accel import eig_descending, active_backend
from ncwishart.model import RiceanChannel, mean_from_singulars
from ncwishart.mcsim import McRun, eig_samples


def _random_grams(rng, nb, s, t):
    g = (rng.standard_normal((nb, s, t)) + 1j * rng.standard_normal((nb, s, t)))
    return g @ g.conj().transpose(0, 2, 1)


def bench_kernel(backend, nb, s, t, repeats=5):
    rng = np.random.default_rng(0)
    mats = _random_grams(rng, nb, s, t)
    eig_descending(mats[:16], backend=backend)  # warm-up / JIT compile
    best = float("inf")
    for _ in range(repeats):
        t0 = time.perf_counter()
        eig_descending(mats, backend=backend)
        best = min(best, time.perf_counter() - t0)
    return best


def bench_end_to_end(backend, samples):
    import os

    from ncwishart import mcsim

    old = os.environ.get("NCWISHART_BACKEND")
    os.environ["NCWISHART_BACKEND"] = backend
    try:
        ch = RiceanChannel(3, 5, 10.0, mean_from_singulars(3, 5, [2.9751, 2.2840, 0.9657], seed=7))
        run = McRun(ch, seed=1, n_samples=samples, workers=1)
        mcsim._phi_samples_cached.cache_clear()
        t0 = time.perf_counter()
        eig_samples(run)
        return time.perf_counter() - t0
    finally:
        if old is None:
            del os.environ["NCWISHART_BACKEND"]
        else:
            os.environ["NCWISHART_BACKEND"] = old


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--samples", type=int, default=200_000)
    args = ap.parse_args()
    warnings.filterwarnings("ignore", message="rescaling singular values")

    print(f"active backend (auto): {active_backend()}")
    print()
    print(f"{'batch':>10} {'shape':>8} {'numpy':>10} {'numba':>10} {'speedup':>8}")
    for nb, s, t in [(2000, 2, 3), (2000, 3, 5), (2000, 4, 4), (20000, 3, 5)]:
        t_np = bench_kernel("numpy", nb, s, t)
        try:
            t_nb = bench_kernel("numba", nb, s, t)
            ratio = f"{t_np / t_nb:7.1f}x"
            t_nb_s = f"{t_nb * 1e3:8.1f}ms"
        except Exception as exc:  # numba unavailable
            t_nb_s, ratio = "n/a", str(exc)[:30]
        print(f"{nb:>10} {s}x{s:<6} {t_np * 1e3:8.1f}ms {t_nb_s:>10} {ratio:>8}")

    print()
    for backend in ("numpy", "numba"):
        try:
            dt = bench_end_to_end(backend, args.samples)
            print(f"end-to-end {args.samples} draws (3x5, {backend}): {dt:.2f}s")
        except Exception as exc:
            print(f"end-to-end ({backend}): unavailable ({exc})")


if __name__ == "__main__":
    main()
