"""Timing comparison of the two OMP backends.

The compiled kernel (``_omp_fast``) runs tight per-signal C loops; the
numpy fallback (``_omp_py``) advances all signals in lockstep through
BLAS matrix products. Which one wins depends on the batch size and the
dictionary: BLAS amortizes beautifully over large batches, the compiled
kernel has no per-iteration Python or allocation overhead. This script
prints the matrix so the trade-off is visible on the machine at hand.

Run:  python3 benchmarks/bench_omp.py [--quick]
"""
import argparse
import time

import numpy as np

from patchsphere import _omp_fast, _omp_py


def time_backend(fn, repeats=3):
    best = float("inf")
    for _ in range(repeats):
        start = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - start)
    return best


def main():
    parser = argparse.ArgumentParser()
    parser.add_argument("--quick", action="store_true",
                        help="smaller grid, one repeat")
    args = parser.parse_args()
    repeats = 1 if args.quick else 3
    batches = (1, 64, 1024) if args.quick else (1, 64, 1024, 16384)
    configs = [
        # (dims, n_atoms, k) — 8x8 atoms against the paper-scale dictionaries
        (64, 256, 5),
        (64, 512, 5),
        (64, 1082, 5),
    ]
    rng = np.random.default_rng(0)
    print(f"{'dims':>5} {'atoms':>6} {'k':>3} {'batch':>7} "
          f"{'numpy [ms]':>11} {'fast [ms]':>10} {'ratio':>7}")
    for dims, n_atoms, k in configs:
        matrix = rng.normal(size=(dims, n_atoms))
        matrix /= np.linalg.norm(matrix, axis=0)
        matrix_t = np.ascontiguousarray(matrix.T)
        usable = np.ones(n_atoms, dtype=bool)
        usable_u8 = usable.astype(np.uint8)
        for batch in batches:
            signals = np.ascontiguousarray(rng.normal(size=(batch, dims)))
            t_np = time_backend(
                lambda: _omp_py.omp_batch(matrix, signals, k, usable), repeats)
            t_fast = time_backend(
                lambda: _omp_fast.omp_batch(matrix_t, signals, k, usable_u8),
                repeats)
            ratio = t_np / t_fast if t_fast > 0 else float("inf")
            print(f"{dims:>5} {n_atoms:>6} {k:>3} {batch:>7} "
                  f"{t_np * 1e3:>11.2f} {t_fast * 1e3:>10.2f} {ratio:>7.2f}")
    # sanity: both backends agree on a fresh problem
    signals = rng.normal(size=(256, 64))
    matrix = rng.normal(size=(64, 256))
    matrix /= np.linalg.norm(matrix, axis=0)
    s1, c1, n1, r1 = _omp_py.omp_batch(matrix, signals, 5,
                                       np.ones(256, dtype=bool))
    s2, c2, n2, r2 = _omp_fast.omp_batch(np.ascontiguousarray(matrix.T),
                                         signals, 5,
                                         np.ones(256, dtype=np.uint8))
    assert np.array_equal(s1, s2) and np.array_equal(n1, n2)
    assert np.allclose(c1, c2, atol=1e-12) and np.allclose(r1, r2, atol=1e-12)
    print("\nbackends agree on supports, coefficients and residuals")


if __name__ == "__main__":
    main()
