"""Timing comparison of the compiled kernels against the numpy fallback.

Runs the two hot kernels (dense simplex pivoting, batched affine max) on a
range of workload sizes, checks both implementations agree, and prints a
table. Usage:

    python3 benchmarks/bench_kernels.py [--repeats N]
"""

import argparse
import time

import numpy as np

from farpoint._kernels import fallback

try:
    from farpoint._kernels import _core as compiled
except ImportError:
    compiled = None


def simplex_workload(rng, m, n):
    """Slack-start maximization tableau for a bounded random LP."""
    A = np.abs(rng.normal(size=(m, n))) + 0.1
    b = rng.uniform(1.0, 5.0, m)
    c = rng.uniform(0.1, 1.0, n)
    T = np.zeros((m + 1, n + m + 1))
    T[:m, :n] = A
    T[:m, n:n + m] = np.eye(m)
    T[:m, -1] = b
    T[m, :n] = -c
    basis = np.arange(n, n + m, dtype=np.int64)
    return T, basis


def time_simplex(impl, tableaus, repeats):
    best = np.inf
    results = []
    for _ in range(repeats):
        copies = [(T.copy(), basis.copy()) for T, basis in tableaus]
        start = time.perf_counter()
        run_results = []
        for T, basis in copies:
            status = impl.run_simplex(T, basis)
            run_results.append((status, T[-1, -1]))
        best = min(best, time.perf_counter() - start)
        results = run_results
    return best, results


def time_batch_max(impl, workloads, repeats):
    best = np.inf
    results = []
    for _ in range(repeats):
        start = time.perf_counter()
        run_results = [impl.batch_affine_max(A, b, X)
                       for A, b, X in workloads]
        best = min(best, time.perf_counter() - start)
        results = [(v.sum(), i.sum()) for v, i in run_results]
    return best, results


def main():
    parser = argparse.ArgumentParser(description=__doc__.split("\n")[0])
    parser.add_argument("--repeats", type=int, default=5)
    args = parser.parse_args()

    if compiled is None:
        print("compiled extension not built; timing the fallback only")
    rng = np.random.default_rng(0)

    rows = []
    for m, n in [(10, 8), (20, 15), (40, 30), (80, 60)]:
        tableaus = [simplex_workload(rng, m, n) for _ in range(50)]
        t_fb, r_fb = time_simplex(fallback, tableaus, args.repeats)
        if compiled is not None:
            t_c, r_c = time_simplex(compiled, tableaus, args.repeats)
            for (s1, v1), (s2, v2) in zip(r_fb, r_c):
                assert s1 == s2 and abs(v1 - v2) <= 1e-9 * (1 + abs(v1)), \
                    "implementations disagree on a simplex workload"
        else:
            t_c = float("nan")
        rows.append((f"simplex m={m:>2} n={n:>2} x50", t_fb, t_c))

    for k, n, N in [(8, 6, 200_000), (24, 10, 200_000), (64, 16, 100_000)]:
        workloads = [(rng.normal(size=(k, n)), rng.normal(size=k),
                      rng.normal(size=(N, n))) for _ in range(3)]
        t_fb, r_fb = time_batch_max(fallback, workloads, args.repeats)
        if compiled is not None:
            t_c, r_c = time_batch_max(compiled, workloads, args.repeats)
            for (v1, i1), (v2, i2) in zip(r_fb, r_c):
                assert abs(v1 - v2) <= 1e-6 * (1 + abs(v1)) and i1 == i2, \
                    "implementations disagree on a batch-max workload"
        else:
            t_c = float("nan")
        rows.append((f"batch-max k={k:>2} n={n:>2} N={N} x3", t_fb, t_c))

    width = max(len(r[0]) for r in rows)
    print(f"{'workload':<{width}}  {'fallback':>10}  {'compiled':>10}  "
          f"{'speedup':>7}")
    for name, t_fb, t_c in rows:
        speed = t_fb / t_c if t_c == t_c and t_c > 0 else float("nan")
        print(f"{name:<{width}}  {t_fb * 1e3:>8.2f}ms  {t_c * 1e3:>8.2f}ms  "
              f"{speed:>6.2f}x")


if __name__ == "__main__":
    main()
