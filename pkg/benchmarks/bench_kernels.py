"""Time the numba and pure-numpy kernel paths side by side.

    python benchmarks/bench_kernels.py --n 100000 --k 5 --d 2

A full k-means fit is timed once per backend in a subprocess, because the
backend is fixed at import time by GRADEMINER_DISABLE_NUMBA.
"""
import argparse
import os
import subprocess
import sys
import timeit

import numpy as np

from grademiner import _kernels

FIT_SNIPPET = """
import time, numpy as np
from grademiner import _kernels
from grademiner.kmeans import KMeansConfig, fit
_kernels.warmup()
pts = np.random.default_rng(0).normal(0, 1, ({n}, {d}))
t0 = time.perf_counter()
for s in range({reps}):
    fit(pts, KMeansConfig(k={k}, seed=s))
print(_kernels.BACKEND, (time.perf_counter() - t0) / {reps})
"""


def best_of(fn, repeat):
    return min(timeit.repeat(fn, number=1, repeat=repeat))


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=int, default=100_000)
    ap.add_argument("--k", type=int, default=5)
    ap.add_argument("--d", type=int, default=2)
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()

    rng = np.random.default_rng(0)
    pts = rng.normal(0, 1, (args.n, args.d))
    cents = pts[rng.choice(args.n, args.k, replace=False)].copy()
    assignment = rng.integers(0, args.k, args.n).astype(np.int64)
    values = rng.integers(0, 3, args.n).astype(np.int64)
    classes = rng.integers(0, 3, args.n).astype(np.int64)

    cases = {
        "assign": (lambda f: f(pts, cents), "assign"),
        "cluster_sums": (lambda f: f(pts, assignment, args.k), "cluster_sums"),
        "sse": (lambda f: f(pts, cents, assignment), "sse"),
        "contingency": (lambda f: f(values, classes, 3, 3), "contingency"),
    }
    print(f"n={args.n} k={args.k} d={args.d}, best of {args.repeat} (ms)")
    print(f"{'kernel':<14}{'numpy':>10}{'numba':>10}{'speedup':>10}")
    for name, (call, attr) in cases.items():
        np_fn = getattr(_kernels, f"{attr}_numpy")
        t_np = best_of(lambda: call(np_fn), args.repeat)
        if _kernels.HAS_NUMBA:
            nb_fn = getattr(_kernels, f"{attr}_numba")
            call(nb_fn)
            t_nb = best_of(lambda: call(nb_fn), args.repeat)
            print(f"{name:<14}{t_np * 1e3:>10.2f}{t_nb * 1e3:>10.2f}{t_np / t_nb:>9.1f}x")
        else:
            print(f"{name:<14}{t_np * 1e3:>10.2f}{'-':>10}{'-':>10}")

    print("\nfull fit (ms per run)")
    snippet = FIT_SNIPPET.format(n=args.n, d=args.d, k=args.k, reps=3)
    for flag in ("0", "1"):
        env = dict(os.environ, GRADEMINER_DISABLE_NUMBA=flag)
        out = subprocess.run([sys.executable, "-c", snippet], capture_output=True, text=True, env=env)
        if out.returncode:
            print(out.stderr)
            continue
        backend, secs = out.stdout.split()
        print(f"{backend:<14}{float(secs) * 1e3:>10.2f}")


if __name__ == "__main__":
    main()
