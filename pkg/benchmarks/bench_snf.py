"""Time the local Smith form kernels: compiled, vectorized numpy and plain Python.

Also times one end-to-end comparison run with and without the compiled
kernel (LOGDRW_NO_NUMBA=1 in a subprocess).

    python benchmarks/bench_snf.py [--sizes 8 16 32 64] [--repeat 5]
"""

import argparse
import os
import subprocess
import sys
import time

import numpy as np

from logdrw import snf


def best_of(func, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        func()
        times.append(time.perf_counter() - t0)
    return min(times)


def random_matrix(rng, n, p, M):
    # low-rank-ish with p-divisible blocks so the pivots have mixed valuations
    A = rng.integers(0, p**M, size=(n, n))
    A[: n // 2] *= p
    return A.astype(np.int64)


def kernels(sizes, repeat, p=2, M=4):
    rng = np.random.default_rng(0)
    print(f"{'n':>5} {'numba':>10} {'numpy':>10} {'python':>10}   (best of {repeat}, p={p} M={M})")
    if snf.USE_NUMBA:
        snf._snf_kernel(np.eye(2, dtype=np.int64), p, M)  # compile outside the timing
    for n in sizes:
        A = random_matrix(rng, n, p, M)
        ref = snf.snf_local_numpy(A, p, M)[0]
        row = [f"{n:>5}"]
        if snf.USE_NUMBA:
            assert sorted(snf._snf_kernel(A.copy(), p, M)[0]) == sorted(ref)
            row.append(f"{best_of(lambda: snf._snf_kernel(A.copy(), p, M), repeat):10.5f}")
        else:
            row.append(f"{'-':>10}")
        row.append(f"{best_of(lambda: snf.snf_local_numpy(A, p, M), repeat):10.5f}")
        if n <= 32:
            row.append(f"{best_of(lambda: snf._snf_impl(A.copy(), p, M), 1):10.5f}")
        else:
            row.append(f"{'-':>10}")
        print(" ".join(row))


def end_to_end():
    script = (
        "import time\n"
        "from logdrw.compare import verify_comparison\n"
        "from logdrw.log_drw import AbsoluteContext\n"
        "from logdrw.monoid import AffineMonoid\n"
        "monoids = [AffineMonoid.free(2), AffineMonoid.from_generators([(1, 0), (1, 2)]), AffineMonoid.free(3)]\n"
        "t = time.perf_counter()\n"
        "for P in monoids:\n"
        "    for m in (1, 2, 3):\n"
        "        verify_comparison(AbsoluteContext(P, 2, m), box=3 if P.rank < 3 else 2)\n"
        "print(f'{time.perf_counter() - t:.2f}')\n"
    )
    for label, extra in (("numba", {}), ("numpy", {"LOGDRW_NO_NUMBA": "1"})):
        env = dict(os.environ, **extra)
        out = subprocess.run([sys.executable, "-c", script], env=env, capture_output=True, text=True, check=True)
        print(f"compare verify N^2, cone, N^3 at m = 1..3 [{label}]: {out.stdout.strip()} s")


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--sizes", type=int, nargs="+", default=[8, 16, 32, 64, 128])
    parser.add_argument("--repeat", type=int, default=5)
    parser.add_argument("--skip-end-to-end", action="store_true")
    args = parser.parse_args()
    kernels(args.sizes, args.repeat)
    if not args.skip_end_to_end:
        end_to_end()


if __name__ == "__main__":
    main()
