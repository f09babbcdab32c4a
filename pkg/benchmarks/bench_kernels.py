"""Benchmark the hot kernels on the numba and pure-numpy backends.

Runs the welfare-ascent and float-leximin kernels on a batch of random
approval profiles with the current backend, then re-runs itself in a
subprocess with BUDGETDIV_NO_NUMBA=1 and prints the speedup.

    python benchmarks/bench_kernels.py [--profiles N] [--n N] [--m M]
"""

import argparse
import json
import os
import subprocess
import sys
import time

import numpy as np

from budgetdiv import kernels


def make_profiles(count, n, m, seed=0):
    rng = np.random.default_rng(seed)
    mats = []
    for _ in range(count):
        mat = np.zeros((n, m))
        for i in range(n):
            k = int(rng.integers(1, max(2, m // 2 + 2)))
            cols = rng.choice(m, size=k, replace=False)
            mat[i, cols] = 1.0
        mats.append(mat)
    return mats


def run_once(mats):
    # warm-up triggers JIT compilation outside the timers
    kernels.welfare_ascent(mats[0], 0.0, 1e-10, 200_000)
    kernels.leximin_f64(mats[0])

    t0 = time.perf_counter()
    iters = 0
    for mat in mats:
        _, resid, it = kernels.welfare_ascent(mat, 0.0, 1e-10, 200_000)
        iters += it
    nash_time = time.perf_counter() - t0

    t0 = time.perf_counter()
    for mat in mats:
        kernels.leximin_f64(mat)
    leximin_time = time.perf_counter() - t0

    return {
        "backend": kernels.backend_name(),
        "nash_ms": 1000 * nash_time / len(mats),
        "nash_iters": iters / len(mats),
        "leximin_ms": 1000 * leximin_time / len(mats),
    }


def main():
    parser = argparse.ArgumentParser()
    parser.add_argument("--profiles", type=int, default=100)
    parser.add_argument("--n", type=int, default=20)
    parser.add_argument("--m", type=int, default=10)
    parser.add_argument("--json", action="store_true", help="print raw stats only")
    args = parser.parse_args()

    mats = make_profiles(args.profiles, args.n, args.m)
    stats = run_once(mats)
    if args.json:
        print(json.dumps(stats))
        return

    print(f"profiles: {args.profiles} (n={args.n}, m={args.m})")
    print(f"[{stats['backend']}] welfare ascent: {stats['nash_ms']:.3f} ms/solve "
          f"({stats['nash_iters']:.0f} iters), leximin: {stats['leximin_ms']:.3f} ms/solve")

    if kernels.backend_name() == "numba":
        env = dict(os.environ, BUDGETDIV_NO_NUMBA="1")
        out = subprocess.run(
            [sys.executable, __file__, "--profiles", str(max(4, args.profiles // 20)),
             "--n", str(args.n), "--m", str(args.m), "--json"],
            env=env, capture_output=True, text=True)
        if out.returncode != 0:
            print("numpy fallback run failed:", out.stderr.strip())
            return
        other = json.loads(out.stdout)
        print(f"[{other['backend']}] welfare ascent: {other['nash_ms']:.3f} ms/solve, "
              f"leximin: {other['leximin_ms']:.3f} ms/solve")
        print(f"speedup: welfare ascent {other['nash_ms'] / stats['nash_ms']:.0f}x, "
              f"leximin {other['leximin_ms'] / stats['leximin_ms']:.0f}x")


if __name__ == "__main__":
    main()
