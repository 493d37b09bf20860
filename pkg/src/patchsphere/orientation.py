"""Dominant-orientation estimation from four Radon-like projectors.

Each projector averages, over a family of parallel rays, the absolute value
of the ray-mean of a zero-mean patch. The four ray families are rows (h),
columns (v), diagonals of constant ``i - j`` (d1) and anti-diagonals of
constant ``i + j`` (d2).

Angle convention: orientations are measured in array coordinates, from the
column axis toward the row axis, in ``[0, pi)``. A pattern whose stripes run
along constant ``i - j`` therefore has orientation 45 degrees and excites
d1; stripes along constant ``i + j`` lie at 135 degrees and excite d2.

The diagonal projectors use a two-group normalization: the rays on one side
of (and including) the corner-to-corner diagonal are averaged separately
from the rays on the other side, and the two group averages are summed.
The closed forms implement this directly; ``brute_force_projector``
re-derives the same quantity from explicitly enumerated pixel rays and is
the test oracle for the closed-form index algebra.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .patches import ZERO_MEAN_ATOL, Patch, ZeroMeanPatch, as_patch, zero_mean

DIRECTIONS = ("h", "v", "d1", "d2")

#: raw-projector denominators below this are treated as degenerate
DEGENERACY_EPS = 1e-12


@dataclass(frozen=True)
class ProjectorSet:
    """Raw and pairwise-normalized projector values for one patch."""

    raw_h: float
    raw_v: float
    raw_d1: float
    raw_d2: float
    r_h: float
    r_v: float
    r_d1: float
    r_d2: float
    degenerate_hv: bool
    degenerate_diag: bool


@dataclass(frozen=True)
class RaySet:
    """Explicit pixel rays for one projection direction.

    For d1 and d2 the rays are ordered with the ``major`` group first
    (the group containing the corner-to-corner diagonal); ``major_count``
    gives its size. h and v have a single group.
    """

    direction: str
    rays: tuple[tuple[tuple[int, int], ...], ...]
    major_count: int

    @property
    def ray_count(self) -> int:
        return len(self.rays)


@dataclass(frozen=True)
class OrientationEstimate:
    psi: float
    confident: bool
    projectors: ProjectorSet

    @property
    def psi_degrees(self) -> float:
        return math.degrees(self.psi)


def _zero_mean_values(w) -> np.ndarray:
    """Accept a ZeroMeanPatch, Patch-like or raw array; enforce zero mean."""
    if isinstance(w, ZeroMeanPatch):
        return w.values
    if isinstance(w, Patch):
        raise ValueError("projectors operate on zero-mean patches; call zero_mean() first")
    v = np.asarray(w, dtype=np.float64)
    if v.ndim != 2:
        raise ValueError("expected a 2D array")
    if abs(v.sum()) > ZERO_MEAN_ATOL * v.size:
        raise ValueError("input is not zero-mean")
    return v


def _require_min_shape(v: np.ndarray):
    if v.shape[0] < 2 or v.shape[1] < 2:
        raise ValueError("diagonal projectors need at least a 2x2 patch")


def _proj_h(v: np.ndarray) -> float:
    m, n = v.shape
    return float(np.abs(v.sum(axis=1)).sum() / (m * n))


def _proj_v(v: np.ndarray) -> float:
    m, n = v.shape
    return float(np.abs(v.sum(axis=0)).sum() / (m * n))


def _proj_d1_rect(v: np.ndarray) -> float:
    """Constant ``i - j`` rays on an M x N patch, two-group normalization."""
    m, n = v.shape
    upper = 0.0
    for k in range(n):
        ln = min(m, n - k)
        s = 0.0
        for i in range(ln):
            s += v[i, i + k]
        upper += abs(s) / ln
    lower = 0.0
    for k in range(1, m):
        ln = min(n, k)
        s = 0.0
        for i in range(ln):
            s += v[m - k + i, i]
        lower += abs(s) / ln
    return upper / n + lower / (m - 1)


def _proj_d2_rect(v: np.ndarray) -> float:
    """Constant ``i + j`` rays on an M x N patch, two-group normalization.

    Rays are enumerated from the corner outward (descending k) so that on
    a square patch a left-right mirror accumulates exactly the terms of
    the d1 form in the same order — mirror symmetry then holds to the bit.
    """
    m, n = v.shape
    upper = 0.0
    for k in range(m, 0, -1):
        ln = min(n, k)
        s = 0.0
        for j in range(ln):
            s += v[k - j - 1, j]
        upper += abs(s) / ln
    lower = 0.0
    for k in range(n, 1, -1):
        hi = min(n, m + k - 1)
        ln = hi - k + 1
        s = 0.0
        for j in range(k - 1, hi):
            s += v[m - j + k - 2, j]
        lower += abs(s) / ln
    return upper / m + lower / (n - 1)


def _proj_d1_square(v: np.ndarray) -> float:
    """Square-patch simplification of the d1 closed form."""
    m = v.shape[0]
    upper = 0.0
    for k in range(m):
        s = 0.0
        for i in range(m - k):
            s += v[i, i + k]
        upper += abs(s) / (m - k)
    lower = 0.0
    for k in range(1, m):
        s = 0.0
        for i in range(k):
            s += v[m - k + i, i]
        lower += abs(s) / k
    return upper / m + lower / (m - 1)


def _proj_d2_square(v: np.ndarray) -> float:
    """Square-patch simplification of the d2 closed form.

    Same corner-outward enumeration as the rectangular form (descending
    k): the two must match bit-for-bit at M == N, and the order makes a
    left-right mirror reproduce the d1 accumulation sequence exactly.
    """
    m = v.shape[0]
    upper = 0.0
    for k in range(m, 0, -1):
        s = 0.0
        for j in range(k):
            s += v[k - j - 1, j]
        upper += abs(s) / k
    lower = 0.0
    for k in range(m, 1, -1):
        s = 0.0
        for j in range(k - 1, m):
            s += v[m - j + k - 2, j]
        lower += abs(s) / (m - k + 1)
    return upper / m + lower / (m - 1)


def projector(w, direction: str) -> float:
    """Closed-form projector value for one direction.

    The diagonal directions dispatch to the square-patch simplification
    when the patch is square and to the rectangular form otherwise; both
    produce identical values at M == N.
    """
    v = _zero_mean_values(w)
    if direction == "h":
        return _proj_h(v)
    if direction == "v":
        return _proj_v(v)
    _require_min_shape(v)
    square = v.shape[0] == v.shape[1]
    if direction == "d1":
        return _proj_d1_square(v) if square else _proj_d1_rect(v)
    if direction == "d2":
        return _proj_d2_square(v) if square else _proj_d2_rect(v)
    raise ValueError(f"unknown direction {direction!r}")


@lru_cache(maxsize=256)
def build_ray_set(shape: tuple[int, int], direction: str) -> RaySet:
    """Enumerate the pixel rays of one direction explicitly.

    Pixels are grouped by row index (h), column index (v), ``i - j`` (d1)
    or ``i + j`` (d2); this construction is deliberately independent of the
    closed-form index algebra.
    """
    m, n = shape
    if direction == "h":
        rays = [tuple((i, j) for j in range(n)) for i in range(m)]
        return RaySet("h", tuple(rays), major_count=m)
    if direction == "v":
        rays = [tuple((i, j) for i in range(m)) for j in range(n)]
        return RaySet("v", tuple(rays), major_count=n)

    pixels = [(i, j) for i in range(m) for j in range(n)]
    if direction == "d1":
        # major group: j - i in {0 .. n-1}; minor: j - i in {-(m-1) .. -1}
        keys = sorted({j - i for i, j in pixels}, key=lambda c: (c < 0, abs(c)))
        rays = [tuple(p for p in pixels if p[1] - p[0] == c) for c in keys]
        return RaySet("d1", tuple(rays), major_count=n)
    if direction == "d2":
        # major group: i + j in {0 .. m-1}; minor: i + j in {m .. m+n-2}
        keys = sorted({i + j for i, j in pixels})
        rays = [tuple(p for p in pixels if p[0] + p[1] == c) for c in keys]
        return RaySet("d2", tuple(rays), major_count=m)
    raise ValueError(f"unknown direction {direction!r}")


def brute_force_projector(w, direction: str) -> float:
    """Oracle: evaluate a projector from explicitly enumerated rays."""
    v = _zero_mean_values(w)
    if direction in ("d1", "d2"):
        _require_min_shape(v)
    rs = build_ray_set(v.shape, direction)
    ray_means = [abs(sum(float(v[i, j]) for i, j in ray)) / len(ray) for ray in rs.rays]
    major = ray_means[:rs.major_count]
    minor = ray_means[rs.major_count:]
    total = sum(major) / len(major)
    if minor:
        total += sum(minor) / len(minor)
    return total


def normalize_projectors(raw_h: float, raw_v: float,
                         raw_d1: float, raw_d2: float) -> ProjectorSet:
    """Pairwise normalization so r_h^2 + r_v^2 = 1 and r_d1^2 + r_d2^2 = 1.

    Vanishing denominators are flagged as degenerate instead of raising;
    the corresponding normalized values are reported as zero.
    """
    hv = math.hypot(raw_h, raw_v)
    dd = math.hypot(raw_d1, raw_d2)
    degenerate_hv = hv < DEGENERACY_EPS
    degenerate_diag = dd < DEGENERACY_EPS
    r_h, r_v = (0.0, 0.0) if degenerate_hv else (raw_h / hv, raw_v / hv)
    r_d1, r_d2 = (0.0, 0.0) if degenerate_diag else (raw_d1 / dd, raw_d2 / dd)
    return ProjectorSet(raw_h, raw_v, raw_d1, raw_d2,
                        r_h, r_v, r_d1, r_d2, degenerate_hv, degenerate_diag)


def projector_set(w) -> ProjectorSet:
    """All four closed-form projectors of a zero-mean patch, normalized."""
    v = _zero_mean_values(w)
    _require_min_shape(v)
    return normalize_projectors(
        _proj_h(v), _proj_v(v), projector(v, "d1"), projector(v, "d2"))


def psi_from_projectors(r_h: float, r_v: float, r_d1: float, r_d2: float) -> float:
    """Resolve the orientation angle from four (any-scale) projector values.

    The base angle ``atan2(r_v, r_h)`` lies in ``[0, pi/2]`` and determines
    the orientation up to mirroring; the mirror branch is taken when the
    d2 family dominates. The result is folded into ``[0, pi)``.
    """
    alpha = math.atan2(r_v, r_h)
    psi = alpha if r_d1 >= r_d2 else math.pi - alpha
    if psi >= math.pi:
        psi -= math.pi
    return psi


def dominant_orientation(patch) -> OrientationEstimate:
    """Estimate the dominant orientation of an intensity patch.

    Returns the angle in ``[0, pi)`` plus a confidence flag; patches whose
    row and column projectors both vanish (no resolvable orientation) get
    psi = 0 with ``confident=False`` rather than an error.
    """
    p = as_patch(patch)
    if p.rows < 2 or p.cols < 2:
        raise ValueError("orientation needs at least a 2x2 patch")
    ps = projector_set(zero_mean(p))
    if ps.degenerate_hv:
        return OrientationEstimate(0.0, False, ps)
    return OrientationEstimate(psi_from_projectors(ps.r_h, ps.r_v, ps.r_d1, ps.r_d2),
                               True, ps)


# ---------------------------------------------------------------------------
# batched evaluation (used by the block-wise regularity estimator)

@lru_cache(maxsize=64)
def _ray_maps(shape: tuple[int, int]):
    m, n = shape
    i, j = np.indices((m, n))
    d_idx = (j - i + m - 1).ravel()
    a_idx = (i + j).ravel()
    nd = m + n - 1
    dmap = np.zeros((m * n, nd))
    dmap[np.arange(m * n), d_idx] = 1.0
    amap = np.zeros((m * n, nd))
    amap[np.arange(m * n), a_idx] = 1.0
    d_len = dmap.sum(axis=0)
    a_len = amap.sum(axis=0)
    return dmap, amap, d_len, a_len


def projectors_batch(stack: np.ndarray) -> np.ndarray:
    """Raw projectors of a stack of patches, shape (n, 4) as (h, v, d1, d2).

    Input patches are zero-meaned internally. This path reproduces the
    scalar closed forms to floating-point accuracy and exists for speed in
    block-wise loops.
    """
    s = np.asarray(stack, dtype=np.float64)
    if s.ndim != 3:
        raise ValueError("expected a stack of 2D patches")
    _, m, n = s.shape
    if m < 2 or n < 2:
        raise ValueError("diagonal projectors need at least 2x2 patches")
    w = s - s.mean(axis=(1, 2), keepdims=True)
    flat = w.reshape(len(w), m * n)
    r_h = np.abs(w.sum(axis=2)).sum(axis=1) / (m * n)
    r_v = np.abs(w.sum(axis=1)).sum(axis=1) / (m * n)
    dmap, amap, d_len, a_len = _ray_maps((m, n))
    dvals = np.abs(flat @ dmap) / d_len
    avals = np.abs(flat @ amap) / a_len
    # d index 0 corresponds to i - j = m-1 side: indices < m-1 are the minor group
    d1 = dvals[:, m - 1:].sum(axis=1) / n + dvals[:, :m - 1].sum(axis=1) / (m - 1)
    d2 = avals[:, :m].sum(axis=1) / m + avals[:, m:].sum(axis=1) / (n - 1)
    return np.stack([r_h, r_v, d1, d2], axis=1)


def orientations_batch(stack: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Orientation angle and confidence flag per patch in a stack."""
    raw = projectors_batch(stack)
    hv = np.hypot(raw[:, 0], raw[:, 1])
    confident = hv >= DEGENERACY_EPS
    alpha = np.arctan2(raw[:, 1], raw[:, 0])
    psi = np.where(raw[:, 2] >= raw[:, 3], alpha, np.pi - alpha)
    psi = np.where(psi >= np.pi, psi - np.pi, psi)
    psi = np.where(confident, psi, 0.0)
    return psi, confident
