"""Grayscale patches and their basic statistics.

A patch stores real-valued intensities (nominally in ``[0, levels-1]``) so
that interpolated, degraded or rescaled content is representable without
rounding. All operations here are pure; patch values are frozen after
construction.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

DEFAULT_LEVELS = 256

#: absolute tolerance (per pixel) for the zero-mean invariant
ZERO_MEAN_ATOL = 1e-9


def _frozen_array(values) -> np.ndarray:
    a = np.array(values, dtype=np.float64, copy=True, order="C")
    a.flags.writeable = False
    return a


@dataclass(frozen=True)
class Patch:
    """A 2D block of grayscale intensities with a known level count."""

    values: np.ndarray
    levels: int = DEFAULT_LEVELS

    def __post_init__(self):
        v = np.asarray(self.values, dtype=np.float64)
        if v.ndim != 2 or v.shape[0] < 1 or v.shape[1] < 1:
            raise ValueError("patch values must form a non-empty 2D array")
        if not np.all(np.isfinite(v)):
            raise ValueError("patch intensities must all be finite")
        if int(self.levels) < 1:
            raise ValueError("levels must be a positive integer")
        object.__setattr__(self, "values", _frozen_array(v))
        object.__setattr__(self, "levels", int(self.levels))

    @property
    def rows(self) -> int:
        return self.values.shape[0]

    @property
    def cols(self) -> int:
        return self.values.shape[1]

    @property
    def shape(self) -> tuple[int, int]:
        return self.values.shape


@dataclass(frozen=True)
class ZeroMeanPatch:
    """A patch with its mean removed, remembering the removed mean."""

    values: np.ndarray
    source_mean: float

    def __post_init__(self):
        v = _frozen_array(self.values)
        if abs(v.sum()) > ZERO_MEAN_ATOL * v.size:
            raise ValueError("values do not sum to zero within tolerance")
        object.__setattr__(self, "values", v)
        object.__setattr__(self, "source_mean", float(self.source_mean))

    @property
    def shape(self) -> tuple[int, int]:
        return self.values.shape


@dataclass(frozen=True)
class Histogram:
    """Normalized intensity histogram with a populated-bin mask.

    ``mass`` holds zero for unpopulated bins; over the populated bins the
    masses sum to one.
    """

    mass: np.ndarray
    populated: np.ndarray
    bin_count: int = field(init=False)

    def __post_init__(self):
        m = _frozen_array(self.mass)
        p = np.array(self.populated, dtype=bool, copy=True)
        p.flags.writeable = False
        if m.ndim != 1 or m.shape != p.shape:
            raise ValueError("mass and populated mask must be 1D and equal length")
        object.__setattr__(self, "mass", m)
        object.__setattr__(self, "populated", p)
        object.__setattr__(self, "bin_count", int(m.shape[0]))

    @property
    def populated_count(self) -> int:
        return int(np.count_nonzero(self.populated))


def as_patch(source, levels: int = DEFAULT_LEVELS) -> Patch:
    """Coerce an array (or pass through a Patch) into a Patch."""
    if isinstance(source, Patch):
        return source
    return Patch(np.asarray(source), levels=levels)


def zero_mean(patch) -> ZeroMeanPatch:
    """Subtract the patch mean: w[i,j] = I[i,j] - mean(I)."""
    p = as_patch(patch)
    mu = float(p.values.mean())
    w = p.values - mu
    # guard against accumulated rounding in very large patches
    w = w - w.mean()
    return ZeroMeanPatch(values=w, source_mean=mu)


def normalized_mean_intensity(patch) -> float:
    """Mean intensity normalized by the level count.

    Returns ``sum(I) / (levels * rows * cols)``, which lies in
    ``[0, (levels-1)/levels]`` for in-range intensities. The upper end never
    reaches exactly 1; that is deliberate (see elevation mapping).
    """
    p = as_patch(patch)
    return float(p.values.sum() / (p.levels * p.values.size))


def histogram(patch, bins: int | None = None, keep_fraction: float = 0.10) -> Histogram:
    """Intensity histogram with weak bins discarded before normalization.

    Bins whose count falls below ``keep_fraction`` times the maximum count
    are marked unpopulated and excluded; the remaining masses are
    renormalized to sum to one. ``keep_fraction=0`` keeps every nonzero bin
    (a classical normalized histogram). Values outside ``[0, levels-1]``
    are clipped into range before binning.
    """
    p = as_patch(patch)
    if bins is None:
        bins = p.levels
    bins = int(bins)
    if bins < 2:
        raise ValueError("need at least 2 bins")
    if not 0.0 <= keep_fraction < 1.0:
        raise ValueError("keep_fraction must lie in [0, 1)")
    top = float(p.levels - 1)
    clipped = np.clip(p.values, 0.0, top)
    counts, _ = np.histogram(clipped, bins=bins, range=(0.0, top))
    max_count = counts.max()
    threshold = keep_fraction * max_count
    populated = (counts >= threshold) & (counts > 0)
    kept = counts * populated
    mass = kept / kept.sum()
    return Histogram(mass=mass, populated=populated)


def entropy(hist: Histogram) -> float:
    """Shannon entropy (bits) of the populated histogram masses."""
    m = hist.mass[hist.populated]
    if m.size == 0:
        return 0.0
    return float(-np.sum(m * np.log2(m)))


def psnr(a, b, peak: float = 255.0) -> float:
    """Peak signal-to-noise ratio in dB; ``math.inf`` for identical inputs."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape:
        raise ValueError(f"shape mismatch: {a.shape} vs {b.shape}")
    mse = float(np.mean((a - b) ** 2))
    if mse == 0.0:
        return math.inf
    return float(10.0 * np.log10(peak * peak / mse))


def patch_positions(image_shape, size: int, stride: int) -> list[tuple[int, int]]:
    """Top-left corners of all size×size windows, row-major order."""
    h, w = image_shape
    if size > h or size > w:
        raise ValueError(f"patch size {size} exceeds image shape {image_shape}")
    if stride < 1:
        raise ValueError("stride must be >= 1")
    return [(i, j)
            for i in range(0, h - size + 1, stride)
            for j in range(0, w - size + 1, stride)]


def extract_patches(image, size: int, stride: int = 1,
                    levels: int = DEFAULT_LEVELS) -> list[Patch]:
    """Extract square patches in row-major traversal order.

    Stride 1 yields every overlapping patch; stride equal to ``size``
    yields a non-overlapping tiling.
    """
    img = np.asarray(image, dtype=np.float64)
    if img.ndim != 2:
        raise ValueError("image must be 2D grayscale")
    return [Patch(img[i:i + size, j:j + size], levels=levels)
            for i, j in patch_positions(img.shape, size, stride)]
