"""Grayscale image I/O: binary PGM (P5) always, PNG when Pillow is present.

Images travel through the pipeline as float64 arrays with intensities in
[0, 255]; writing quantizes back to 8 bits with half-up rounding.
"""

from __future__ import annotations

import os

import numpy as np

try:
    from PIL import Image as _pil_image
except ImportError:          # PNG support is optional
    _pil_image = None

#: ITU-R 601 luminance weights for color-to-gray conversion
LUMA_WEIGHTS = (0.299, 0.587, 0.114)


def _parse_error(path, msg: str) -> ValueError:
    return ValueError(f"{path}: {msg}")


def _read_tokens(data: bytes, path, count: int) -> tuple[list[bytes], int]:
    """Read whitespace-separated header tokens, skipping # comments."""
    tokens = []
    i = 0
    while len(tokens) < count:
        if i >= len(data):
            raise _parse_error(path, "truncated header")
        c = data[i:i + 1]
        if c == b"#":
            while i < len(data) and data[i:i + 1] not in (b"\n", b"\r"):
                i += 1
        elif c.isspace():
            i += 1
        else:
            j = i
            while j < len(data) and not data[j:j + 1].isspace() and data[j:j + 1] != b"#":
                j += 1
            tokens.append(data[i:j])
            i = j
    return tokens, i


def read_pgm(path) -> np.ndarray:
    """Read a binary (P5) 8-bit PGM file into a float64 array."""
    with open(path, "rb") as f:
        data = f.read()
    if data[:2] != b"P5":
        raise _parse_error(path, "not a binary PGM (P5) file")
    tokens, pos = _read_tokens(data, path, 4)
    try:
        width, height, maxval = (int(t) for t in tokens[1:4])
    except ValueError:
        raise _parse_error(path, "non-numeric PGM header field") from None
    if width < 1 or height < 1:
        raise _parse_error(path, "non-positive image dimensions")
    if not 0 < maxval <= 255:
        raise _parse_error(path, f"unsupported maxval {maxval} (8-bit only)")
    # exactly one whitespace byte separates the header from the raster
    pos += 1
    raster = data[pos:pos + width * height]
    if len(raster) < width * height:
        raise _parse_error(path, "truncated pixel data")
    img = np.frombuffer(raster, dtype=np.uint8).reshape(height, width)
    return img.astype(np.float64)


def write_pgm(path, values, comment: str | None = None) -> None:
    """Write a float array as an 8-bit binary PGM (clip + half-up round).

    ``comment`` becomes a ``#`` line after the magic number; it must not
    contain newlines.
    """
    v = np.asarray(values, dtype=np.float64)
    if v.ndim != 2:
        raise ValueError("PGM output requires a 2D array")
    if comment is not None and ("\n" in comment or "\r" in comment):
        raise ValueError("PGM comment must be a single line")
    q = np.clip(np.floor(v + 0.5), 0, 255).astype(np.uint8)
    h, w = q.shape
    header = "P5\n" + (f"# {comment}\n" if comment else "") + f"{w} {h}\n255\n"
    with open(path, "wb") as f:
        f.write(header.encode("ascii"))
        f.write(q.tobytes())


def read_png(path) -> np.ndarray:
    """Read an 8-bit PNG; color inputs are reduced by luminance weights."""
    if _pil_image is None:
        raise ValueError(
            f"{path}: PNG support needs the optional Pillow dependency "
            "(install the 'png' extra)")
    with _pil_image.open(path) as im:
        if im.mode == "L":
            return np.asarray(im, dtype=np.float64)
        if im.mode in ("I;16", "I", "F"):
            raise _parse_error(path, f"unsupported bit depth (mode {im.mode})")
        rgb = np.asarray(im.convert("RGB"), dtype=np.float64)
    r, g, b = LUMA_WEIGHTS
    return r * rgb[..., 0] + g * rgb[..., 1] + b * rgb[..., 2]


def read_image(path) -> np.ndarray:
    """Dispatch on file extension (.png via Pillow, anything else as PGM)."""
    ext = os.path.splitext(str(path))[1].lower()
    if ext == ".png":
        return read_png(path)
    return read_pgm(path)
