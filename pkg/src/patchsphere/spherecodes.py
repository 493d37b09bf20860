"""Spherical codes: point sets on the unit sphere with large minimal distance.

Codes are built by iterative point repulsion: every point feels an
inverse-cube push from the others (dominated by its nearest neighbors),
moves along its tangent plane with a geometrically decaying step, and is
re-projected onto the sphere. The walk itself descends a smooth repulsion
energy; separately, the best configuration by minimal pairwise chordal
distance is retained, and only sweeps that improve it are accepted into
the reported distance history — which is therefore non-decreasing by
construction. This is a pragmatic optimizer validated against the known
optima at n = 2 (antipodal), 4 (tetrahedron) and 6 (octahedron); at larger
n it yields good, not certified, codes.

Alternatively, externally optimized codes (e.g. published covering tables)
can be loaded from text files with one "x y z" triple per line.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

#: maximum relative deviation from unit norm tolerated in loaded files
LOAD_NORM_TOL = 1e-3


@dataclass(frozen=True)
class SphericalCode:
    """An ordered set of unit-sphere points with provenance."""

    points: np.ndarray
    source: str
    history: tuple[float, ...] = field(default=())

    def __post_init__(self):
        p = np.array(self.points, dtype=np.float64, copy=True)
        if p.ndim != 2 or p.shape[1] != 3 or p.shape[0] < 2:
            raise ValueError("a spherical code needs at least 2 points of dim 3")
        norms = np.linalg.norm(p, axis=1)
        if np.any(np.abs(norms - 1.0) > 1e-9):
            raise ValueError("spherical-code points must be unit-norm")
        p.flags.writeable = False
        object.__setattr__(self, "points", p)
        if not self.history:
            object.__setattr__(self, "history", (self.min_chordal_distance,))

    @property
    def size(self) -> int:
        return int(self.points.shape[0])

    @property
    def min_chordal_distance(self) -> float:
        return float(_min_distance(self.points))


def _min_distance(points: np.ndarray) -> float:
    g = points @ points.T
    np.fill_diagonal(g, -1.0)
    # chordal distance via the Gram matrix: d^2 = 2 - 2 cos
    return float(np.sqrt(max(2.0 - 2.0 * g.max(), 0.0)))


def _unit_rows(x: np.ndarray) -> np.ndarray:
    return x / np.linalg.norm(x, axis=1, keepdims=True)


def _repulsion_sweep(points: np.ndarray, step: float) -> np.ndarray:
    diff = points[:, None, :] - points[None, :, :]
    d2 = np.sum(diff * diff, axis=2)
    np.fill_diagonal(d2, np.inf)
    # inverse-cube weights concentrate the push on nearest neighbors
    force = np.sum(diff / (d2 ** 1.5)[:, :, None], axis=1)
    # tangent-plane component only; radial motion is lost to re-projection
    force -= np.sum(force * points, axis=1, keepdims=True) * points
    norms = np.linalg.norm(force, axis=1, keepdims=True)
    force = np.where(norms > 0, force / np.maximum(norms, 1e-300), 0.0)
    return _unit_rows(points + step * force)


def generate_spherical_code(n: int, seed: int = 0, max_iters: int = 2000,
                            tol: float = 1e-9,
                            patience: int = 300) -> SphericalCode:
    """Maximize the minimal pairwise distance of n seeded random points.

    Runs up to ``max_iters`` repulsion sweeps with a step decaying from
    0.3/sqrt(n) to ~1e-5; stops early once no sweep has improved the best
    minimal distance by at least ``tol`` for ``patience`` consecutive
    sweeps. Returns the best configuration seen.
    """
    if n < 2:
        raise ValueError("a spherical code needs at least 2 points")
    rng = np.random.default_rng(seed)
    pts = _unit_rows(rng.normal(size=(n, 3)))
    best_pts, best = pts, _min_distance(pts)
    history = [best]
    step0 = 0.3 / np.sqrt(n)
    decay = (1e-5 / step0) ** (1.0 / max_iters)
    iterations = 0
    stalled = 0
    for t in range(max_iters):
        iterations += 1
        pts = _repulsion_sweep(pts, step0 * decay ** t)
        d = _min_distance(pts)
        if d > best + tol:
            best_pts, best = pts, d
            history.append(best)
            stalled = 0
        else:
            stalled += 1
            if stalled >= patience:
                break
    return SphericalCode(points=_unit_rows(best_pts),
                         source=f"generated(seed={seed}, iterations={iterations})",
                         history=tuple(history))


def load_spherical_code(path) -> SphericalCode:
    """Load a code from text: one "x y z" per line, or any flat 3n layout.

    Points must already be unit-norm to within 1e-3; they are re-normalized
    exactly, never re-optimized.
    """
    rows = []           # (line_number, tokens)
    with open(path, "r", encoding="ascii") as f:
        for lineno, line in enumerate(f, start=1):
            text = line.split("#", 1)[0].strip()
            if not text:
                continue
            try:
                values = [float(t) for t in text.split()]
            except ValueError:
                raise ValueError(f"{path}:{lineno}: non-numeric value") from None
            rows.append((lineno, values))
    if all(len(v) == 3 for _, v in rows):
        triples = [(lineno, v) for lineno, v in rows]
    else:
        flat = [(lineno, x) for lineno, vals in rows for x in vals]
        if len(flat) % 3 != 0:
            bad = next((ln for ln, v in rows if len(v) not in (1, 3)), rows[0][0])
            raise ValueError(f"{path}:{bad}: expected 3 coordinates per point")
        triples = [(flat[i][0], [flat[i][1], flat[i + 1][1], flat[i + 2][1]])
                   for i in range(0, len(flat), 3)]
    if len(triples) < 2:
        raise ValueError(f"{path}: a spherical code needs at least 2 points")
    pts = np.array([v for _, v in triples], dtype=np.float64)
    norms = np.linalg.norm(pts, axis=1)
    off = np.abs(norms - 1.0) > LOAD_NORM_TOL
    if np.any(off):
        lineno = triples[int(np.argmax(off))][0]
        raise ValueError(f"{path}:{lineno}: point is not unit-norm "
                         f"(|v| = {norms[np.argmax(off)]:.6f})")
    return SphericalCode(points=pts / norms[:, None], source=f"loaded({path})")


def bundled_code_path(name: str = "sphere1082") -> Path:
    """Path of a code file shipped inside the package's data directory."""
    path = Path(__file__).parent / "data" / f"{name}.txt"
    if not path.exists():
        raise FileNotFoundError(f"no bundled code named {name!r}")
    return path


def save_spherical_code(path, code: SphericalCode,
                        comments: tuple[str, ...] = ()) -> None:
    """Write one "x y z" triple per line at full float precision.

    ``comments`` become leading ``#`` lines (the loader ignores them).
    """
    with open(path, "w", encoding="ascii") as f:
        for text in comments:
            f.write(f"# {text}\n")
        for x, y, z in code.points:
            f.write(f"{x:.17g} {y:.17g} {z:.17g}\n")
