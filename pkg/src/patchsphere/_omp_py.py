"""Pure-numpy orthogonal matching pursuit backend.

All signals in a batch advance in lockstep: one correlation GEMM per
iteration, then a batched normal-equation solve on each signal's
accumulated support. Signals that hit the residual floor drop out of the
active set but keep their results. Semantics are identical to the
compiled backend in ``_omp_fast``; this module is the fallback when the
extension is unavailable (or when ``PATCHSPHERE_FORCE_NUMPY`` is set).
"""
from __future__ import annotations

import numpy as np

RESIDUAL_FLOOR = 1e-12


def _solve_supports(atoms_t: np.ndarray, supports: np.ndarray,
                    signals: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Least squares of each signal on its own support (normal equations).

    atoms_t: (n_atoms, dims); supports: (b, t); signals: (b, dims).
    Returns (coefficients (b, t), residuals (b, dims)).
    """
    sel = atoms_t[supports]                      # (b, t, dims)
    gram = sel @ sel.transpose(0, 2, 1)          # (b, t, t)
    rhs = sel @ signals[:, :, None]              # (b, t, 1)
    try:
        coef = np.linalg.solve(gram, rhs)[..., 0]
    except np.linalg.LinAlgError:
        # Rank-deficient support (e.g. duplicated atoms): per-signal lstsq.
        coef = np.empty(rhs.shape[:2])
        for b in range(len(coef)):
            coef[b] = np.linalg.lstsq(sel[b].T, signals[b], rcond=None)[0]
    residuals = signals - (coef[:, None, :] @ sel)[:, 0, :]
    return coef, residuals


def omp_batch(matrix: np.ndarray, signals: np.ndarray, k: int,
              usable: np.ndarray) -> tuple[np.ndarray, np.ndarray,
                                           np.ndarray, np.ndarray]:
    """Run OMP on every row of ``signals`` against dictionary ``matrix``.

    matrix: (dims, n_atoms) unit-energy columns (unusable ones arbitrary);
    signals: (n_signals, dims); usable: boolean (n_atoms,).

    Returns (support (n_signals, k) int32, -1 padded; coefficients
    (n_signals, k); counts (n_signals,); residual energies (n_signals,)).
    Selection is greedy max |correlation| with lowest-index tie-break;
    after each selection the coefficients are re-solved on the whole
    support and the residual recomputed from scratch.
    """
    matrix = np.ascontiguousarray(matrix, dtype=np.float64)
    signals = np.ascontiguousarray(signals, dtype=np.float64)
    n_signals = signals.shape[0]
    n_atoms = matrix.shape[1]
    atoms_t = np.ascontiguousarray(matrix.T)

    support = np.full((n_signals, k), -1, dtype=np.int32)
    coef_out = np.zeros((n_signals, k))
    counts = np.zeros(n_signals, dtype=np.int32)
    resid_energy = np.einsum("ij,ij->i", signals, signals)

    active = resid_energy >= RESIDUAL_FLOOR
    residuals = signals.copy()
    unusable = ~np.asarray(usable, dtype=bool)

    for t in range(k):
        idx = np.flatnonzero(active)
        if idx.size == 0:
            break
        corr = np.abs(residuals[idx] @ matrix)       # (b, n_atoms)
        corr[:, unusable] = -1.0
        if t:  # mask atoms already selected by each signal
            rows = np.repeat(np.arange(idx.size), t)
            corr[rows, support[idx, :t].ravel()] = -1.0
        picks = np.argmax(corr, axis=1).astype(np.int32)
        best = corr[np.arange(idx.size), picks]
        # No atom correlates: the residual is unreachable, freeze as-is.
        stuck = best <= 0.0
        if stuck.any():
            active[idx[stuck]] = False
            idx = idx[~stuck]
            picks = picks[~stuck]
            if idx.size == 0:
                continue
        support[idx, t] = picks
        counts[idx] = t + 1
        coef, res = _solve_supports(atoms_t, support[idx, :t + 1], signals[idx])
        coef_out[idx, :t + 1] = coef
        residuals[idx] = res
        energy = np.einsum("ij,ij->i", res, res)
        resid_energy[idx] = energy
        active[idx] = energy >= RESIDUAL_FLOOR
    return support, coef_out, counts, np.maximum(resid_energy, 0.0)
