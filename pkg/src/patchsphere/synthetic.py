"""Synthetic test patterns: lines, stripes, noise, rotations, degradations.

Used by the test suite and the demo CLI. All generators return float64
arrays with intensities in [0, levels-1]; wrap with ``as_patch`` as needed.
"""

from __future__ import annotations

import math

import numpy as np

WHITE = 255.0
GRAY = 128.0


def constant_patch(size: int, value: float) -> np.ndarray:
    return np.full((size, size), float(value))


def stripe_patch(size: int, direction: str, period: int = 2,
                 hi: float = WHITE, lo: float = 0.0) -> np.ndarray:
    """Binary stripes along rows (h), columns (v) or the two diagonals.

    d1 stripes run along constant ``i - j`` (45 degrees in array
    coordinates), d2 along constant ``i + j``.
    """
    i, j = np.indices((size, size))
    phases = {"h": i, "v": j, "d1": i - j, "d2": i + j}
    if direction not in phases:
        raise ValueError(f"unknown stripe direction {direction!r}")
    return np.where(phases[direction] % period < (period + 1) // 2, lo, hi)


def checkerboard(size: int, hi: float = WHITE, lo: float = 0.0) -> np.ndarray:
    i, j = np.indices((size, size))
    return np.where((i + j) % 2 == 0, hi, lo)


def noise_patch(size: int, rng: np.random.Generator,
                high: float = WHITE) -> np.ndarray:
    return rng.integers(0, int(high) + 1, size=(size, size)).astype(np.float64)


def line_patch(size: int, spacing: int | None = None, thickness: int = 1,
               hi: float = WHITE, lo: float = 0.0) -> np.ndarray:
    """Horizontal line(s) of intensity ``hi`` on a ``lo`` background.

    With ``spacing`` None a single line of the given thickness is drawn at
    the center; otherwise parallel lines repeat every ``spacing`` rows,
    phased so one line passes through the center.
    """
    out = np.full((size, size), float(lo))
    c = size // 2
    if spacing is None:
        start = c - (thickness - 1) // 2
        out[max(start, 0):min(start + thickness, size), :] = hi
        return out
    rows = np.arange(size)
    on = (rows - c) % spacing < thickness
    out[on, :] = hi
    return out


def gaussian_line_patch(size: int, sigma: float | None = None,
                        amp: float = WHITE, background: float = 0.0) -> np.ndarray:
    """Horizontal line with a Gaussian cross-section through the center row.

    The smooth profile avoids the staircase aliasing of 1-pixel binary
    lines, which dominates orientation error on small rotated patches;
    sigma defaults to size/4 (low single-digit degree error at 5x5-21x21).
    A mid-gray ``background`` keeps additive noise mostly in intensity
    range, which matters when histogramming degraded versions.
    """
    if sigma is None:
        sigma = size / 4.0
    c = (size - 1) / 2.0
    prof = background + (amp - background) * np.exp(
        -0.5 * ((np.arange(size) - c) / sigma) ** 2)
    return np.tile(prof[:, None], (1, size))


def rotate_patch(values: np.ndarray, angle: float,
                 fill: float = 0.0) -> np.ndarray:
    """Rotate a patch about its center with bilinear interpolation.

    The angle is measured from the column axis toward the row axis, so
    rotating a horizontal-line patch by ``a`` yields lines at orientation
    ``a`` in the convention used by the orientation estimator. Samples
    falling outside the source get ``fill``.
    """
    v = np.asarray(values, dtype=np.float64)
    m, n = v.shape
    cy, cx = (m - 1) / 2.0, (n - 1) / 2.0
    i, j = np.indices((m, n))
    x = j - cx
    y = i - cy
    ca, sa = math.cos(angle), math.sin(angle)
    xs = ca * x + sa * y + cx
    ys = -sa * x + ca * y + cy
    return _bilinear(v, ys, xs, fill)


def _bilinear(v: np.ndarray, ys: np.ndarray, xs: np.ndarray,
              fill: float) -> np.ndarray:
    m, n = v.shape
    y0 = np.floor(ys).astype(int)
    x0 = np.floor(xs).astype(int)
    fy = ys - y0
    fx = xs - x0
    out = np.zeros(ys.shape)
    for dy, dx, wgt in ((0, 0, (1 - fy) * (1 - fx)), (0, 1, (1 - fy) * fx),
                        (1, 0, fy * (1 - fx)), (1, 1, fy * fx)):
        yy = y0 + dy
        xx = x0 + dx
        inside = (yy >= 0) & (yy < m) & (xx >= 0) & (xx < n)
        vals = np.where(inside, v[np.clip(yy, 0, m - 1), np.clip(xx, 0, n - 1)], fill)
        out += wgt * vals
    return out


def rotated_line_sequence(size: int, angles_deg, spacing: int | None = None,
                          thickness: int = 1) -> list[tuple[float, np.ndarray]]:
    """Clean line patches rotated to each angle (degrees), with ground truth."""
    base = line_patch(size, spacing=spacing, thickness=thickness)
    return [(a, rotate_patch(base, math.radians(a))) for a in angles_deg]


def add_noise(values: np.ndarray, snr_db: float,
              rng: np.random.Generator) -> np.ndarray:
    """Add white Gaussian noise at the given SNR relative to signal variance."""
    v = np.asarray(values, dtype=np.float64)
    power = v.var()
    if power == 0:
        raise ValueError("constant signal has no defined SNR")
    sigma = math.sqrt(power / 10.0 ** (snr_db / 10.0))
    return v + rng.normal(0.0, sigma, v.shape)


def reshuffle(values: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    """Random permutation of all pixels (destroys spatial structure)."""
    v = np.asarray(values, dtype=np.float64)
    flat = v.ravel().copy()
    rng.shuffle(flat)
    return flat.reshape(v.shape)


def eight_patch_fixture(size: int = 64, seed: int = 7):
    """Canonical demo set: three constants, four stripe directions, noise.

    Returns (label, values) pairs; the first seven are highly regular, the
    last is uniform noise.
    """
    rng = np.random.default_rng(seed)
    # diagonal stripes need a period that does not divide the size: with
    # full periods every row sums to the same value, so the row/column
    # projectors vanish and the orientation degenerates
    diag_period = next(p for p in (5, 4, 3, 7) if size % p)
    return [
        ("black", constant_patch(size, 0.0)),
        ("white", constant_patch(size, WHITE)),
        ("gray", constant_patch(size, GRAY)),
        ("stripes_h", stripe_patch(size, "h")),
        ("stripes_v", stripe_patch(size, "v")),
        ("stripes_d1", stripe_patch(size, "d1", period=diag_period)),
        ("stripes_d2", stripe_patch(size, "d2", period=diag_period)),
        ("noise", noise_patch(size, rng)),
    ]


def patch_mosaic(tiles, grid: tuple[int, int]) -> np.ndarray:
    """Tile equally-sized patches into one image, row-major."""
    rows, cols = grid
    if len(tiles) != rows * cols:
        raise ValueError("tile count does not match grid")
    strips = [np.hstack(tiles[r * cols:(r + 1) * cols]) for r in range(rows)]
    return np.vstack(strips)
