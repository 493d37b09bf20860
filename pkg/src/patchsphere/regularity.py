"""Pattern-regularity estimators.

Two interchangeable measures of how "regular" (structured) a patch is,
both mapping into [0, 1]:

* ``rho_entropy`` — from the pruned intensity histogram's Shannon entropy,
  rho_E = min(1 - (E - 1)/7, 1). Tied to 8-bit intensities: the constants
  1 and 7 come from E = 8 bits for a maximally random grayscale patch.
  Invariant to any spatial reshuffle of the pixels.
* ``rho_ldc`` — local directional consistency: dominant orientations of
  sub-blocks are binned over [0, 180) degrees and regularity decays with
  the number b of populated bins, rho_LDC = (B - b)/(B - 1). Sensitive to
  spatial structure (a reshuffle destroys it).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .orientation import orientations_batch
from .patches import as_patch, entropy, histogram, patch_positions

#: patches smaller than this (both sides) use a sliding block window by
#: default -- a non-overlapping tiling would yield too few orientation counts
SLIDING_BELOW = 32


@dataclass(frozen=True)
class RegularityConfig:
    estimator: str = "entropy"          # "entropy" or "ldc"
    ldc_window: int = 8
    ldc_sliding: bool | None = None     # None: sliding iff patch < 32x32
    ldc_bins: int = 18
    ldc_threshold_fraction: float = 0.05
    entropy_keep_fraction: float = 0.10

    def __post_init__(self):
        if self.estimator not in ("entropy", "ldc"):
            raise ValueError(f"unknown estimator {self.estimator!r}")
        if self.ldc_window < 2:
            raise ValueError("ldc_window must be at least 2")
        if self.ldc_bins < 2:
            raise ValueError("need at least 2 orientation bins")
        for f in (self.ldc_threshold_fraction, self.entropy_keep_fraction):
            if not 0.0 <= f < 1.0:
                raise ValueError("fractions must lie in [0, 1)")


@dataclass(frozen=True)
class OrientationHistogram:
    """Counts of block-wise dominant orientations over [0, 180) degrees."""

    counts: np.ndarray
    populated: np.ndarray
    measured_blocks: int

    def __post_init__(self):
        c = np.array(self.counts, dtype=np.int64, copy=True)
        p = np.array(self.populated, dtype=bool, copy=True)
        if c.ndim != 1 or c.shape != p.shape:
            raise ValueError("counts and populated mask must be 1D and equal length")
        c.flags.writeable = False
        p.flags.writeable = False
        object.__setattr__(self, "counts", c)
        object.__setattr__(self, "populated", p)

    @property
    def bin_count(self) -> int:
        return int(self.counts.shape[0])

    @property
    def populated_count(self) -> int:
        return int(self.populated.sum())


def rho_entropy(patch, keep_fraction: float = 0.10) -> float:
    """Entropy-based regularity, rho_E = min(1 - (E - 1)/7, 1), in [0, 1]."""
    p = as_patch(patch)
    if p.levels != 256:
        raise ValueError("entropy regularity is defined for 256-level intensities")
    e = entropy(histogram(p, bins=256, keep_fraction=keep_fraction))
    # E <= 8 makes the lower clamp a no-op in theory; keep it as a safety net
    return float(min(max(1.0 - (e - 1.0) / 7.0, 0.0), 1.0))


def block_orientations(patch, cfg: RegularityConfig = RegularityConfig()) -> OrientationHistogram:
    """Histogram of block-wise dominant orientations.

    Blocks are ``ldc_window`` squares: every position (sliding) for small
    patches, a top-left-anchored non-overlapping tiling otherwise (partial
    boundary blocks dropped). Blocks with no resolvable orientation are
    skipped. A bin is populated iff its count reaches
    ``ldc_threshold_fraction`` of the maximum bin count.
    """
    p = as_patch(patch)
    win = cfg.ldc_window
    if p.rows < win or p.cols < win:
        raise ValueError(f"patch {p.shape} smaller than block window {win}")
    sliding = cfg.ldc_sliding
    if sliding is None:
        sliding = p.rows < SLIDING_BELOW and p.cols < SLIDING_BELOW
    stride = 1 if sliding else win
    pos = patch_positions(p.shape, win, stride)
    stack = np.stack([p.values[i:i + win, j:j + win] for i, j in pos])
    psis, confident = orientations_batch(stack)
    b = cfg.ldc_bins
    width = math.pi / b
    idx = np.minimum((psis[confident] / width).astype(int), b - 1)
    counts = np.bincount(idx, minlength=b)
    max_count = counts.max() if counts.size else 0
    populated = (counts >= cfg.ldc_threshold_fraction * max_count) & (counts > 0)
    return OrientationHistogram(counts, populated, measured_blocks=int(confident.sum()))


def ldc_regularity(populated_bins: int, total_bins: int) -> float:
    """rho_LDC = (B - b)/(B - 1): 1 for a single bin, 0 for all bins."""
    if not 1 <= populated_bins <= total_bins:
        raise ValueError("populated bin count out of range")
    return float((total_bins - populated_bins) / (total_bins - 1))


def rho_ldc(patch, cfg: RegularityConfig = RegularityConfig()) -> float:
    """Local-directional-consistency regularity in [0, 1].

    Patches in which no block yields a confident orientation (e.g. exactly
    constant ones) report 1.0: nothing contradicts directional consistency.
    """
    p = as_patch(patch)
    if p.rows < 7 or p.cols < 7:
        raise ValueError("directional consistency needs at least a 7x7 patch")
    h = block_orientations(p, cfg)
    if h.populated_count == 0:
        return 1.0
    return ldc_regularity(h.populated_count, h.bin_count)


def regularity(patch, cfg: RegularityConfig = RegularityConfig()) -> float:
    """Dispatch to the estimator selected in the config."""
    if cfg.estimator == "entropy":
        return rho_entropy(patch, keep_fraction=cfg.entropy_keep_fraction)
    return rho_ldc(patch, cfg)
