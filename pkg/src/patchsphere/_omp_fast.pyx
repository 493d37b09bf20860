# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled orthogonal matching pursuit kernel.

One signal at a time, tight C loops: correlation scan with strict-greater
comparison (so ties resolve to the lowest atom index), normal-equation
solve on the accumulated support via a small Cholesky, explicit residual
recomputation, stop at k atoms or residual energy below 1e-12. Matches
the numpy lockstep backend in ``_omp_py`` bit-for-bit on well-conditioned
supports; on a numerically dependent support this kernel stops early
while the numpy path falls back to lstsq (both are documented behaviors
for degenerate dictionaries, which unit-energy random-bar atoms do not
produce).
"""

from libc.math cimport fabs, sqrt

import numpy as np

cdef double RESIDUAL_FLOOR = 1e-12


cdef int _cholesky_solve(double* gram, double* rhs, double* work,
                         double* out, int t) nogil:
    """Solve (t x t) gram @ out = rhs; returns 0 on success, 1 if the
    matrix is not numerically positive definite."""
    cdef int i, j, m
    cdef double s, pivot
    # Lower-triangular factor written over a copy of gram in `work`.
    for i in range(t):
        for j in range(t):
            work[i * t + j] = gram[i * t + j]
    for i in range(t):
        s = work[i * t + i]
        for m in range(i):
            s -= work[i * t + m] * work[i * t + m]
        if s <= 1e-13 * work[0]:
            return 1
        pivot = sqrt(s)
        work[i * t + i] = pivot
        for j in range(i + 1, t):
            s = work[j * t + i]
            for m in range(i):
                s -= work[j * t + m] * work[i * t + m]
            work[j * t + i] = s / pivot
    # Forward then backward substitution.
    for i in range(t):
        s = rhs[i]
        for m in range(i):
            s -= work[i * t + m] * out[m]
        out[i] = s / work[i * t + i]
    for i in range(t - 1, -1, -1):
        s = out[i]
        for m in range(i + 1, t):
            s -= work[m * t + i] * out[m]
        out[i] = s / work[i * t + i]
    return 0


def omp_batch(double[:, ::1] matrix_t, double[:, ::1] signals, int k,
              unsigned char[::1] usable):
    """OMP for every row of ``signals``.

    matrix_t: (n_atoms, dims) — the dictionary TRANSPOSED so each atom is
    a contiguous row; signals: (n_signals, dims); usable: per-atom flags.
    Returns (support, coefficients, counts, residual_energies) shaped as
    in ``_omp_py.omp_batch``.
    """
    cdef Py_ssize_t n_atoms = matrix_t.shape[0]
    cdef Py_ssize_t dims = matrix_t.shape[1]
    cdef Py_ssize_t n_signals = signals.shape[0]

    support_arr = np.full((n_signals, k), -1, dtype=np.int32)
    coef_arr = np.zeros((n_signals, k))
    count_arr = np.zeros(n_signals, dtype=np.int32)
    resid_arr = np.zeros(n_signals)

    cdef int[:, ::1] support = support_arr
    cdef double[:, ::1] coef = coef_arr
    cdef int[::1] counts = count_arr
    cdef double[::1] resid = resid_arr

    work_arr = np.zeros(dims + 3 * k + 2 * k * k)
    cdef double[::1] w = work_arr
    cdef double* r
    cdef double* gram
    cdef double* rhs
    cdef double* sol
    cdef double* chol
    cdef Py_ssize_t s, a, d, i, j
    cdef int best, taken, failed, already
    cdef double dot, bestval, energy, acc

    with nogil:
        r = &w[0]
        gram = &w[dims]
        rhs = &w[dims + k * k]
        sol = &w[dims + k * k + k]
        chol = &w[dims + k * k + 2 * k]
        for s in range(n_signals):
            energy = 0.0
            for d in range(dims):
                r[d] = signals[s, d]
                energy += r[d] * r[d]
            taken = 0
            while taken < k and energy >= RESIDUAL_FLOOR:
                best = -1
                bestval = 0.0
                for a in range(n_atoms):
                    if not usable[a]:
                        continue
                    already = 0
                    for i in range(taken):
                        if support[s, i] == a:
                            already = 1
                            break
                    if already:
                        continue
                    dot = 0.0
                    for d in range(dims):
                        dot += matrix_t[a, d] * r[d]
                    if fabs(dot) > bestval:
                        bestval = fabs(dot)
                        best = a
                if best < 0:
                    break  # residual orthogonal to every available atom
                support[s, taken] = best
                taken += 1
                # Normal equations on the whole support, solved fresh.
                for i in range(taken):
                    for j in range(taken):
                        dot = 0.0
                        for d in range(dims):
                            dot += matrix_t[support[s, i], d] * matrix_t[support[s, j], d]
                        gram[i * taken + j] = dot
                    dot = 0.0
                    for d in range(dims):
                        dot += matrix_t[support[s, i], d] * signals[s, d]
                    rhs[i] = dot
                failed = _cholesky_solve(gram, rhs, chol, sol, taken)
                if failed:
                    taken -= 1
                    support[s, taken] = -1
                    break
                for i in range(taken):
                    coef[s, i] = sol[i]
                energy = 0.0
                for d in range(dims):
                    acc = signals[s, d]
                    for i in range(taken):
                        acc -= sol[i] * matrix_t[support[s, i], d]
                    r[d] = acc
                    energy += acc * acc
            counts[s] = taken
            resid[s] = energy
    return support_arr, coef_arr, count_arr, resid_arr
