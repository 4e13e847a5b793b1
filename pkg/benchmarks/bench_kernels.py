"""Benchmark the compiled kernels against the pure-numpy fallback.

Run from a build with the extension available:

    python benchmarks/bench_kernels.py [--rows 22] [--cols 64] [--jacobi-n 150]

The fallback is always importable; the compiled timings are skipped when the
extension is not built.
"""
import argparse
import time

import numpy as np

from reglap import kernels
from reglap.kernels import fallback


def _time(fn, repeats=3):
    best = float("inf")
    for _ in range(repeats):
        t0 = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t0)
    return best, out


def bench_inf_to_one(rows, cols, seed=0):
    rng = np.random.default_rng(seed)
    B = np.ascontiguousarray(rng.standard_normal((rows, cols)))
    t_fb, v_fb = _time(lambda: fallback.inf_to_one_exact(B))
    print(f"inf_to_one_exact {rows}x{cols} (2^{rows - 1} sign vectors)")
    print(f"  fallback: {t_fb * 1e3:9.2f} ms  value {v_fb:.6f}")
    if kernels.COMPILED:
        t_c, v_c = _time(lambda: kernels.inf_to_one_exact(B))
        assert abs(v_c - v_fb) < 1e-8 * max(1.0, abs(v_fb))
        print(f"  compiled: {t_c * 1e3:9.2f} ms  speedup {t_fb / t_c:5.1f}x")
    else:
        print("  compiled: not built")


def bench_jacobi(n, seed=0):
    rng = np.random.default_rng(seed)
    M = rng.standard_normal((n, n))
    S0 = (M + M.T) / 2

    def _run(impl):
        S = S0.copy(order="C")
        V = np.eye(n)
        sweeps = impl.jacobi_sweeps(S, V, 1e-13, 60)
        return np.sort(np.diag(S)), sweeps

    t_fb, (ev_fb, sw_fb) = _time(lambda: _run(fallback), repeats=1)
    print(f"jacobi_sweeps n={n}")
    print(f"  fallback: {t_fb * 1e3:9.2f} ms  ({sw_fb} sweeps)")
    if kernels.COMPILED:
        t_c, (ev_c, sw_c) = _time(lambda: _run(kernels))
        assert np.allclose(ev_c, ev_fb, atol=1e-9)
        print(f"  compiled: {t_c * 1e3:9.2f} ms  speedup {t_fb / t_c:5.1f}x")
    else:
        print("  compiled: not built")


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--rows", type=int, default=22)
    parser.add_argument("--cols", type=int, default=64)
    parser.add_argument("--jacobi-n", type=int, default=150)
    args = parser.parse_args()
    print(f"compiled extension active: {kernels.COMPILED}")
    bench_inf_to_one(args.rows, args.cols)
    bench_jacobi(args.jacobi_n)


if __name__ == "__main__":
    main()
