"""Benchmark the numba kernels against the pure-numpy fallback.

Runs each hot kernel on representative workloads and prints a timing table.
The two paths are also checked for agreement on every workload, since model
reproducibility depends on them being bit-identical.

Usage:
    python benchmarks/bench_kernels.py [--repeats 5]
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from agrorec.forest import RfParams, rf_train
from agrorec.kernels import numpy_backend

try:
    from agrorec.kernels import numba_backend
except ImportError:
    numba_backend = None


def timeit(fn, repeats):
    fn()  # warm-up (JIT compile on the numba path)
    times = []
    for _ in range(repeats):
        start = time.perf_counter()
        fn()
        times.append(time.perf_counter() - start)
    return min(times)


def bench_split_scan(rng, repeats):
    n, m, k = 4000, 8, 19
    x = rng.normal(size=(n, m))
    y = rng.integers(0, k, size=n).astype(np.int64)
    a = numpy_backend.split_scan(x, y, k)
    b = numba_backend.split_scan(x, y, k)
    assert a == b, "split_scan backends disagree"
    return (
        f"split_scan {n}x{m}, {k} classes",
        timeit(lambda: numpy_backend.split_scan(x, y, k), repeats),
        timeit(lambda: numba_backend.split_scan(x, y, k), repeats),
    )


def bench_tree_route(rng, repeats):
    x = rng.normal(size=(4000, 10))
    y = (x[:, 0] * x[:, 1] > 0).astype(np.int64)
    model = rf_train(x, y, RfParams(n_trees=1, seed=0), class_names=("a", "b"))
    t = model.trees[0]
    probe = rng.normal(size=(200_000, 10))
    a = numpy_backend.tree_route(t.feature, t.threshold, t.left, t.right, probe)
    b = numba_backend.tree_route(t.feature, t.threshold, t.left, t.right, probe)
    assert np.array_equal(a, b), "tree_route backends disagree"
    return (
        f"tree_route {probe.shape[0]} rows, {t.n_nodes}-node tree",
        timeit(lambda: numpy_backend.tree_route(t.feature, t.threshold, t.left,
                                                t.right, probe), repeats),
        timeit(lambda: numba_backend.tree_route(t.feature, t.threshold, t.left,
                                                t.right, probe), repeats),
    )


def bench_smo(rng, repeats):
    n = 400
    x = np.vstack([rng.normal(size=(n // 2, 6)) - 0.8,
                   rng.normal(size=(n // 2, 6)) + 0.8])
    y = np.array([-1.0] * (n // 2) + [1.0] * (n // 2))
    sq = ((x[:, None, :] - x[None, :, :]) ** 2).sum(-1)
    gram = np.exp(-sq / 6.0)
    a = numpy_backend.smo_solve(gram, y, 1.0, 1e-3, 50, np.zeros(0))
    b = numba_backend.smo_solve(gram, y, 1.0, 1e-3, 50, np.zeros(0))
    assert np.array_equal(a[0], b[0]) and a[1] == b[1], "smo backends disagree"
    return (
        f"smo_solve {n} points, rbf gram",
        timeit(lambda: numpy_backend.smo_solve(gram, y, 1.0, 1e-3, 50, np.zeros(0)), repeats),
        timeit(lambda: numba_backend.smo_solve(gram, y, 1.0, 1e-3, 50, np.zeros(0)), repeats),
    )


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--repeats", type=int, default=5)
    args = parser.parse_args()
    if numba_backend is None:
        print("numba is not installed; nothing to compare")
        return 1
    rng = np.random.default_rng(0)
    rows = [
        bench_split_scan(rng, args.repeats),
        bench_tree_route(rng, args.repeats),
        bench_smo(rng, args.repeats),
    ]
    width = max(len(r[0]) for r in rows)
    print(f"{'workload':<{width}}  {'numpy':>10}  {'numba':>10}  {'speedup':>8}")
    for label, t_np, t_nb in rows:
        print(f"{label:<{width}}  {t_np * 1e3:>8.2f}ms  {t_nb * 1e3:>8.2f}ms  "
              f"{t_np / t_nb:>7.1f}x")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
