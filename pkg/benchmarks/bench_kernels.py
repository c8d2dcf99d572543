"""Time the hot kernels under both backends and check they agree.

    python benchmarks/bench_kernels.py [--repeat 5]
"""

import argparse
import time

import numpy as np

from ptfsense import kernels
from ptfsense._backend import HAS_NUMBA, set_backend
from ptfsense.generators import random_ptf
from ptfsense.rng import stream


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        times.append(time.perf_counter() - t0)
    return min(times), out


def cases():
    rng = stream(0, "bench")
    vec = rng.standard_normal(1 << 20)
    yield "fwht n=20", lambda: kernels.fwht(vec.copy())

    p = random_ptf(16, 3, rng, "dense")
    terms = kernels.TermArrays.from_masks(p.coeffs)
    X = rng.choice([-1.0, 1.0], size=(50_000, 16))
    yield f"eval_terms {len(p.coeffs)} terms x 50k", lambda: kernels.eval_terms(X, terms)

    table = np.where(rng.random(1 << 14) < 0.5, -1, 1).astype(np.int8)
    abits = rng.integers(0, 2, size=(4096, 14))
    alpha = rng.integers(0, 8, size=(4096, 14))
    yield "reduction n=14 m=8 x 4096", lambda: kernels.reduction_total_influence(table, abits, alpha, 8)


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()
    if not HAS_NUMBA:
        raise SystemExit("numba is not importable; nothing to compare")

    print(f"{'kernel':34s} {'numpy':>10s} {'numba':>10s} {'speedup':>8s}  equal")
    for name, fn in cases():
        set_backend("numba")
        fn()  # compile outside the timed region
        t_jit, out_jit = best_of(fn, args.repeat)
        set_backend("numpy")
        t_np, out_np = best_of(fn, args.repeat)
        equal = np.array_equal(out_jit, out_np)
        print(f"{name:34s} {t_np * 1e3:8.2f}ms {t_jit * 1e3:8.2f}ms {t_np / t_jit:7.1f}x  {equal}")
    set_backend("numba")


if __name__ == "__main__":
    main()
