"""Sphere encoding of patch features and labeled point constellations.

A patch maps to a point inside the unit ball: radius = regularity rho,
azimuth = twice the dominant orientation (2*psi), elevation = theta =
(T - 0.5)*pi from the normalized mean intensity T. Cartesian coordinates
follow the polarization-optics convention

    S1 = rho * cos(2*chi) * cos(2*psi)
    S2 = rho * cos(2*chi) * sin(2*psi)
    S3 = rho * sin(2*chi)

with theta = 2*chi. ``from_stokes`` inverts the mapping; azimuth recovery
uses the two-argument arctangent of (S1, S2), which handles all four
quadrants and the poles (an arcsin-based inversion breaks down for
S1 < 0, S2 < 0 and divides by zero at the poles).
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field

import numpy as np

from .orientation import dominant_orientation
from .patches import as_patch, normalized_mean_intensity
from .regularity import RegularityConfig, regularity

#: radius below which a point is treated as the ball center (angles -> 0)
ORIGIN_EPS = 1e-12
#: |cos(theta)| below which a point is treated as polar (azimuth -> 0)
POLE_EPS = 1e-9
#: slack allowed on unit-ball membership for loaded/computed points
BALL_TOL = 1e-6

CSV_HEADER = "id,label,S1,S2,S3,rho,psi_deg,theta_deg,confident"


@dataclass(frozen=True)
class EncodedPoint:
    """One patch (or atom) as a point in the unit ball."""

    rho: float
    azimuth: float            # 2*psi, radians in [0, 2*pi)
    elevation: float          # theta = 2*chi, radians in [-pi/2, pi/2]
    s1: float
    s2: float
    s3: float
    label: str | None = None
    orientation_confident: bool = True

    def __post_init__(self):
        if not -1e-9 <= self.rho <= 1.0 + BALL_TOL:
            raise ValueError(f"regularity {self.rho} outside [0, 1]")
        norm = self.s1 ** 2 + self.s2 ** 2 + self.s3 ** 2
        if abs(norm - self.rho ** 2) > 1e-9:
            raise ValueError("Stokes coordinates inconsistent with radius")

    @property
    def psi(self) -> float:
        return self.azimuth / 2.0

    @property
    def stokes(self) -> tuple[float, float, float]:
        return (self.s1, self.s2, self.s3)


@dataclass(frozen=True)
class Constellation:
    """Ordered encoded points plus provenance metadata for exports."""

    points: tuple[EncodedPoint, ...]
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        if not self.points:
            raise ValueError("a constellation cannot be empty")
        object.__setattr__(self, "points", tuple(self.points))
        object.__setattr__(self, "metadata", dict(self.metadata))

    def __len__(self) -> int:
        return len(self.points)

    def __iter__(self):
        return iter(self.points)

    def to_csv(self) -> str:
        """CSV with one row per point; metadata as leading # comments."""
        buf = io.StringIO()
        for key in sorted(self.metadata):
            buf.write(f"# {key}: {self.metadata[key]}\n")
        buf.write(CSV_HEADER + "\n")
        w = csv.writer(buf, lineterminator="\n")
        for i, p in enumerate(self.points):
            w.writerow([i, p.label or "",
                        f"{p.s1:.6f}", f"{p.s2:.6f}", f"{p.s3:.6f}",
                        f"{p.rho:.6f}",
                        f"{math.degrees(p.psi):.6f}",
                        f"{math.degrees(p.elevation):.6f}",
                        "true" if p.orientation_confident else "false"])
        return buf.getvalue()

    def to_json(self) -> str:
        points = [{
            "id": i, "label": p.label or "",
            "S1": round(p.s1, 6), "S2": round(p.s2, 6), "S3": round(p.s3, 6),
            "rho": round(p.rho, 6),
            "psi_deg": round(math.degrees(p.psi), 6),
            "theta_deg": round(math.degrees(p.elevation), 6),
            "confident": p.orientation_confident,
        } for i, p in enumerate(self.points)]
        return json.dumps({"metadata": self.metadata, "points": points},
                          indent=2, sort_keys=True) + "\n"


def elevation_from_intensity(t: float) -> float:
    """Linear map of normalized mean intensity to elevation, (T-0.5)*pi."""
    if not 0.0 <= t <= 1.0:
        raise ValueError(f"normalized intensity {t} outside [0, 1]")
    return (t - 0.5) * math.pi


def to_stokes(rho, psi, chi):
    """Cartesian ball coordinates from (radius, orientation, half-elevation).

    Accepts scalars or broadcastable arrays.
    """
    rho = np.asarray(rho, dtype=np.float64)
    two_psi = 2.0 * np.asarray(psi, dtype=np.float64)
    two_chi = 2.0 * np.asarray(chi, dtype=np.float64)
    c = rho * np.cos(two_chi)
    s1 = c * np.cos(two_psi)
    s2 = c * np.sin(two_psi)
    s3 = rho * np.sin(two_chi)
    if s1.ndim == 0:
        return float(s1), float(s2), float(s3)
    return s1, s2, s3


def from_stokes(s1, s2, s3):
    """Invert ``to_stokes``: returns (rho, theta, phi) with phi = 2*psi.

    theta = arcsin(S3/rho) with the ratio clamped to [-1, 1]; phi is the
    two-argument angle of (S1, S2) reduced to [0, 2*pi). Points at the
    ball center report both angles as 0; polar points report phi = 0.
    Radii beyond 1 (plus tolerance) are rejected.
    """
    s1 = np.asarray(s1, dtype=np.float64)
    s2 = np.asarray(s2, dtype=np.float64)
    s3 = np.asarray(s3, dtype=np.float64)
    rho = np.sqrt(s1 * s1 + s2 * s2 + s3 * s3)
    if np.any(rho > 1.0 + BALL_TOL):
        raise ValueError("point lies outside the unit ball")
    central = rho < ORIGIN_EPS
    safe_rho = np.where(central, 1.0, rho)
    theta = np.arcsin(np.clip(s3 / safe_rho, -1.0, 1.0))
    theta = np.where(central, 0.0, theta)
    phi = np.mod(np.arctan2(s2, s1), 2.0 * math.pi)
    polar = np.abs(np.cos(theta)) < POLE_EPS
    phi = np.where(central | polar, 0.0, phi)
    if rho.ndim == 0:
        return float(rho), float(theta), float(phi)
    return rho, theta, phi


def rescale_for_encoding(values: np.ndarray, levels: int = 256) -> np.ndarray:
    """Min-max rescale arbitrary real values onto [0, levels-1].

    Intended for energy-normalized atoms, whose scale carries no intensity
    meaning. Constant inputs keep their mean (clipped to [0, 1]) as the
    normalized intensity instead: (levels-1) * clip(mean, 0, 1) everywhere.
    """
    v = np.asarray(values, dtype=np.float64)
    lo = v.min()
    span = v.max() - lo
    if span < 1e-12:
        level = (levels - 1) * min(max(float(v.mean()), 0.0), 1.0)
        return np.full(v.shape, level)
    return (v - lo) * ((levels - 1) / span)


def encode_patch(patch, cfg: RegularityConfig = RegularityConfig(),
                 label: str | None = None) -> EncodedPoint:
    """Encode one intensity patch as a point in the unit ball."""
    p = as_patch(patch)
    rho = regularity(p, cfg)
    est = dominant_orientation(p)
    theta = elevation_from_intensity(normalized_mean_intensity(p))
    s1, s2, s3 = to_stokes(rho, est.psi, theta / 2.0)
    return EncodedPoint(rho=rho, azimuth=2.0 * est.psi, elevation=theta,
                        s1=s1, s2=s2, s3=s3, label=label,
                        orientation_confident=est.confident)


def encode_collection(sources, cfg: RegularityConfig = RegularityConfig(),
                      labels=None, rescale: bool = False,
                      metadata: dict | None = None) -> Constellation:
    """Encode a sequence of patches/arrays, preserving order.

    ``rescale=True`` min-max rescales each input onto [0, 255] first —
    required for energy-normalized dictionary atoms.
    """
    sources = list(sources)
    if not sources:
        raise ValueError("nothing to encode")
    if labels is None:
        labels = [None] * len(sources)
    labels = list(labels)
    if len(labels) != len(sources):
        raise ValueError("label count does not match source count")
    points = []
    for src, lab in zip(sources, labels):
        vals = src.values if hasattr(src, "values") else np.asarray(src)
        if rescale:
            vals = rescale_for_encoding(vals)
        points.append(encode_patch(vals, cfg, label=lab))
    return Constellation(tuple(points), metadata or {})
