#!/usr/bin/env python3
"""Benchmark the compiled sweep kernels against the pure-Python fallback.

Both backends are imported directly (ignoring the import-time selection) and
timed on identical inputs, so the table below is a like-for-like comparison
of the hot inner loops.

Usage: python benchmarks/bench_kernels.py [--n 2000] [--density 0.01]
                                          [--image 128] [--repeats 5]
"""

import argparse
import time

import numpy as np

import nqpsor as nq
from nqpsor import _kernels_py
from nqpsor import imaging

try:
    from nqpsor import _kernels as _compiled
except ImportError:
    _compiled = None


def _time(fn, repeats):
    best = float("inf")
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def bench_psor(n, density, repeats, sweeps=20):
    A = nq.gen_matrix(nq.GenSpec(n, density, nq.spd_spectrum(n, 1e4), seed=1))
    gp = nq.gen_rhs(A, seed=2)
    p = gp.problem

    def run(kernel):
        x = np.zeros(n)
        w = nq.matvec(p.A, x)
        def body():
            for _ in range(sweeps):
                kernel(p.A.row_starts, p.A.col_indices, p.A.values, p.A.diag,
                       p.b, p.lower, p.upper, 1.4, x, w)
        return body

    rows = []
    py = _time(run(_kernels_py.psor_sweep), repeats) / sweeps
    rows.append(("python", py))
    if _compiled is not None:
        c = _time(run(_compiled.psor_sweep), repeats) / sweeps
        rows.append(("compiled", c))
    return f"psor_sweep (n={n}, nnz={A.nnz})", rows


def bench_stamp(size, repeats, sweeps=5):
    op = imaging.BlurOperator.gaussian(size, size, 2.0)
    truth = imaging.synthetic_image(size)
    noisy = imaging.add_noise(np.clip(op.apply(truth), 0, 1), 0.1, seed=0)
    lower = np.zeros((size, size))
    upper = np.ones((size, size))

    def run(kernel):
        x = noisy.copy()
        r = noisy - op.apply(x)
        def body():
            for _ in range(sweeps):
                kernel(op._v_start, op._v_len, op._v_wts,
                       op._h_start, op._h_len, op._h_wts,
                       op._v_sq, op._h_sq, lower, upper, 0.9, x, r)
        return body

    rows = []
    py = _time(run(_kernels_py.stamp_normal_sweep), repeats) / sweeps
    rows.append(("python", py))
    if _compiled is not None:
        c = _time(run(_compiled.stamp_normal_sweep), repeats) / sweeps
        rows.append(("compiled", c))
    return f"stamp_normal_sweep ({size}x{size} image)", rows


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--n", type=int, default=2000)
    ap.add_argument("--density", type=float, default=0.01)
    ap.add_argument("--image", type=int, default=128)
    ap.add_argument("--repeats", type=int, default=5)
    args = ap.parse_args()

    if _compiled is None:
        print("note: compiled kernels not built; timing the fallback only")

    for label, rows in (
        bench_psor(args.n, args.density, args.repeats),
        bench_stamp(args.image, args.repeats),
    ):
        print(f"\n{label}")
        base = dict(rows).get("python")
        for name, seconds in rows:
            speedup = "" if name == "python" else f"  ({base / seconds:.1f}x)"
            print(f"  {name:9s} {seconds * 1e3:9.3f} ms/sweep{speedup}")


if __name__ == "__main__":
    main()
