"""Sparse approximation over a bar-atom dictionary and image reconstruction.

Orthogonal matching pursuit: greedy max-|correlation| atom selection with
lowest-index tie-break, least-squares re-solve on the accumulated support
after every selection, stop at ``k`` atoms or residual energy below 1e-12.
Patches never get DC/mean preprocessing — the atoms carry brightness
themselves, so the dictionary must represent it.

Two interchangeable backends: a compiled kernel (``_omp_fast``) and a
numpy lockstep fallback (``_omp_py``). The compiled one is used when the
extension built; set ``PATCHSPHERE_FORCE_NUMPY=1`` to force the fallback.
``benchmarks/bench_omp.py`` compares the two.
"""
from __future__ import annotations

import math
import os
import time
from dataclasses import dataclass

import numpy as np

from . import _omp_py
from .patches import psnr

RESIDUAL_FLOOR = 1e-12
_CHUNK = 4096

if os.environ.get("PATCHSPHERE_FORCE_NUMPY"):
    _backend = _omp_py
    _BACKEND_NAME = "numpy"
else:
    try:
        from . import _omp_fast as _backend  # type: ignore[no-redef]
        _BACKEND_NAME = "fast"
    except ImportError:
        _backend = _omp_py
        _BACKEND_NAME = "numpy"


def backend_name() -> str:
    """Either ``"fast"`` (compiled extension) or ``"numpy"``."""
    return _BACKEND_NAME


@dataclass(frozen=True)
class SparseCode:
    """Result of one OMP run: support, aligned coefficients, leftover energy."""
    support: tuple[int, ...]
    coefficients: tuple[float, ...]
    residual_energy: float

    def __post_init__(self):
        if len(self.support) != len(self.coefficients):
            raise ValueError("support and coefficients must align")
        if len(set(self.support)) != len(self.support):
            raise ValueError("support indices must be distinct")
        if any(i < 0 for i in self.support):
            raise ValueError("support indices must be non-negative")
        if not self.residual_energy >= 0.0:
            raise ValueError("residual energy must be >= 0")


@dataclass(frozen=True)
class ReconstructionReport:
    """Bookkeeping for one reconstruction run."""
    image: str
    dict_id: str
    k: int
    stride: int
    psnr_db: float
    seconds: float

    def to_json_dict(self) -> dict:
        # JSON has no Infinity literal; exact reconstructions say "inf".
        value = self.psnr_db if math.isfinite(self.psnr_db) else "inf"
        return {"image": self.image, "dict": self.dict_id, "k": self.k,
                "stride": self.stride, "psnr_db": value,
                "seconds": self.seconds}


def _matrix_and_usable(dictionary) -> tuple[np.ndarray, np.ndarray]:
    """Accept a Dictionary or a plain (dims, n_atoms) matrix."""
    matrix = getattr(dictionary, "matrix", None)
    if matrix is None:
        matrix = np.asarray(dictionary, dtype=np.float64)
        if matrix.ndim != 2:
            raise ValueError("dictionary matrix must be 2D (dims, n_atoms)")
        usable = np.einsum("ij,ij->j", matrix, matrix) > RESIDUAL_FLOOR
    else:
        usable = np.asarray(dictionary.usable, dtype=bool)
    return np.ascontiguousarray(matrix, dtype=np.float64), usable


def _run_backend(matrix: np.ndarray, signals: np.ndarray, k: int,
                 usable: np.ndarray):
    signals = np.ascontiguousarray(signals, dtype=np.float64)
    if _BACKEND_NAME == "fast":
        return _backend.omp_batch(np.ascontiguousarray(matrix.T), signals,
                                  int(k), usable.astype(np.uint8))
    return _backend.omp_batch(matrix, signals, int(k), usable)


def omp_signals(dictionary, signals: np.ndarray, k: int):
    """OMP over many signals at once (rows of ``signals``).

    Returns the raw backend arrays (support, coefficients, counts,
    residual energies); see :func:`omp` for the single-signal API.
    """
    matrix, usable = _matrix_and_usable(dictionary)
    n_usable = int(np.count_nonzero(usable))
    if n_usable == 0:
        raise ValueError("every atom has zero energy")
    if not 1 <= k <= n_usable:
        raise ValueError(f"k={k} out of range 1..{n_usable} (usable atoms)")
    signals = np.atleast_2d(np.asarray(signals, dtype=np.float64))
    if signals.shape[1] != matrix.shape[0]:
        raise ValueError(f"signal length {signals.shape[1]} != atom "
                         f"dimension {matrix.shape[0]}")
    return _run_backend(matrix, signals, k, usable)


def omp(dictionary, signal: np.ndarray, k: int) -> SparseCode:
    """Sparse-code a single signal; see the module docstring for the rules."""
    signal = np.asarray(signal, dtype=np.float64).ravel()
    support, coef, counts, resid = omp_signals(dictionary, signal[None, :], k)
    n = int(counts[0])
    return SparseCode(support=tuple(int(i) for i in support[0, :n]),
                      coefficients=tuple(float(c) for c in coef[0, :n]),
                      residual_energy=float(resid[0]))


def _coverage_offsets(extent: int, size: int, stride: int) -> np.ndarray:
    """Stride-spaced window offsets, with the final window clamped to the
    edge so every pixel is covered even when the stride does not divide."""
    offsets = list(range(0, extent - size + 1, stride))
    if offsets[-1] != extent - size:
        offsets.append(extent - size)
    return np.asarray(offsets)


def reconstruct(image: np.ndarray, dictionary, k: int, stride: int = 1,
                image_name: str = "", dict_id: str = ""):
    """Approximate every patch with OMP and average the overlapping estimates.

    Returns ``(reconstructed image, ReconstructionReport)``; PSNR is
    measured against the input (peak 255). Accumulation order is fixed
    (row-major patch order), so outputs are deterministic.
    """
    start = time.perf_counter()
    image = np.asarray(image, dtype=np.float64)
    if image.ndim != 2:
        raise ValueError("image must be 2D grayscale")
    size = dictionary.atom_size
    if size > min(image.shape):
        raise ValueError(f"atom size {size} exceeds image shape {image.shape}")
    if stride < 1:
        raise ValueError("stride must be >= 1")
    if stride > size:
        # a stride wider than the window leaves interior pixels uncovered
        raise ValueError(f"stride {stride} exceeds atom size {size}")
    matrix, usable = _matrix_and_usable(dictionary)

    rows = _coverage_offsets(image.shape[0], size, stride)
    cols = _coverage_offsets(image.shape[1], size, stride)
    ii, jj = (a.ravel() for a in np.meshgrid(rows, cols, indexing="ij"))
    windows = np.lib.stride_tricks.sliding_window_view(image, (size, size))

    recon_sum = np.zeros_like(image)
    counts = np.zeros_like(image)
    for lo in range(0, len(ii), _CHUNK):
        ci = ii[lo:lo + _CHUNK]
        cj = jj[lo:lo + _CHUNK]
        signals = windows[ci, cj].reshape(len(ci), size * size)
        support, coef, nsel, _ = omp_signals(dictionary, signals, k)
        estimates = np.zeros_like(signals)
        for t in range(k):
            live = nsel > t
            if not live.any():
                break
            estimates[live] += (coef[live, t, None]
                                * matrix.T[support[live, t]])
        estimates = estimates.reshape(len(ci), size, size)
        # Each (di, dj) plane hits every patch position exactly once, so
        # plain fancy-index accumulation is safe and deterministic.
        for di in range(size):
            for dj in range(size):
                recon_sum[ci + di, cj + dj] += estimates[:, di, dj]
                counts[ci + di, cj + dj] += 1.0
    recon = recon_sum / counts
    value = psnr(image, recon)
    return recon, ReconstructionReport(image=image_name, dict_id=dict_id,
                                       k=int(k), stride=int(stride),
                                       psnr_db=value,
                                       seconds=time.perf_counter() - start)
