"""Random-bar atom dictionaries generated from sphere constellations.

Each constellation point (inside the unit ball) becomes one square atom:
the elevation sets the white-bar density via T = theta/pi + 0.5 and
L = round(T*N) bars; the azimuth phi sets the bar orientation psi = phi/2;
a radius below 1 triggers randomization toward that regularity; finally
atoms are normalized to unit energy.

Rotation detail: the bar pattern is a function of the row coordinate only,
so rotating it amounts to resampling that 1-D profile along rotated
coordinates. We treat the profile as periodic (period N) and interpolate
linearly. Compared to rotating the patch with zero fill, this keeps the
bar density — and therefore the encoded mean intensity — independent of
the angle; with zero fill the empty corners darken diagonal atoms by up to
~17%, which breaks the generate-then-encode consistency contract.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .encoder import from_stokes, rescale_for_encoding
from .regularity import RegularityConfig, regularity

#: energy below which an atom is flagged unusable instead of normalized
ZERO_ENERGY_EPS = 1e-12


@dataclass(frozen=True)
class Atom:
    """One dictionary atom with its generation targets."""

    values: np.ndarray
    rho: float
    theta: float
    phi: float
    zero_energy: bool = False

    def __post_init__(self):
        v = np.array(self.values, dtype=np.float64, copy=True)
        if v.ndim != 2 or v.shape[0] != v.shape[1]:
            raise ValueError("atoms must be square 2D arrays")
        v.flags.writeable = False
        object.__setattr__(self, "values", v)
        energy = float(np.sum(v * v))
        if self.zero_energy:
            if energy > ZERO_ENERGY_EPS:
                raise ValueError("zero-energy flag on a nonzero atom")
        elif abs(energy - 1.0) > 1e-9:
            raise ValueError(f"atom energy {energy} is not 1")

    @property
    def size(self) -> int:
        return int(self.values.shape[0])


@dataclass(frozen=True)
class Dictionary:
    """Ordered list of equally-sized atoms plus generation metadata."""

    atoms: tuple[Atom, ...]
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        if not self.atoms:
            raise ValueError("a dictionary needs at least one atom")
        sizes = {a.size for a in self.atoms}
        if len(sizes) != 1:
            raise ValueError(f"mixed atom sizes {sorted(sizes)}")
        object.__setattr__(self, "atoms", tuple(self.atoms))
        object.__setattr__(self, "metadata", dict(self.metadata))

    def __len__(self) -> int:
        return len(self.atoms)

    @property
    def atom_size(self) -> int:
        return self.atoms[0].size

    @property
    def matrix(self) -> np.ndarray:
        """Atoms as columns: (N*N, n_atoms), row-major flattening."""
        return np.stack([a.values.ravel() for a in self.atoms], axis=1)

    @property
    def usable(self) -> np.ndarray:
        """Mask of atoms with unit energy (zero-energy ones excluded)."""
        return np.array([not a.zero_energy for a in self.atoms])


def _sample_bars_rotated(bars: np.ndarray, psi: float) -> np.ndarray:
    """Resample a per-row profile along coordinates rotated by psi.

    The profile is treated as periodic with period N and sampled at the
    nearest row, which keeps every bar exactly one pixel wide at any angle;
    psi = 0 reproduces the profile exactly. (Linear interpolation was tried
    and rejected: it splits fractional-position bars across two rows at half
    amplitude, which measurably biases the orientation recovered from the
    finished atom.)
    """
    n = bars.shape[0]
    c = (n - 1) / 2.0
    i, j = np.indices((n, n))
    v = -math.sin(psi) * (j - c) + math.cos(psi) * (i - c) + c
    return bars[np.round(np.mod(v, n)).astype(int) % n]


def randomize(values: np.ndarray, rho_target: float, rng: np.random.Generator,
              mode: str = "swap", tol: float = 0.05, max_attempts: int = 200,
              cfg: RegularityConfig = RegularityConfig()) -> np.ndarray:
    """Degrade a patch toward a target regularity; returns the best state.

    ``swap`` shuffles random pixel pairs in batches of N, which preserves
    the intensity histogram (it can only lower directional regularity, not
    entropy-based regularity); ``noise`` adds increasing white noise, which
    reliably lowers both. After each batch/increment the regularity is
    re-measured; the state closest to the target wins, and the search stops
    early once within ``tol``.
    """
    if mode not in ("swap", "noise"):
        raise ValueError(f"unknown randomization mode {mode!r}")
    current = np.array(values, dtype=np.float64, copy=True)
    span = float(current.max() - current.min()) or 1.0
    n = current.shape[0]

    def measure(v):
        return regularity(rescale_for_encoding(v), cfg)

    best = current.copy()
    best_err = abs(measure(current) - rho_target)
    for attempt in range(max_attempts):
        if best_err <= tol:
            break
        if mode == "swap":
            flat = current.reshape(-1)
            a = rng.integers(0, flat.size, size=n)
            b = rng.integers(0, flat.size, size=n)
            flat[a], flat[b] = flat[b].copy(), flat[a].copy()
        else:
            current = current + rng.normal(0.0, 0.02 * span, current.shape)
        err = abs(measure(current) - rho_target)
        if err < best_err:
            best, best_err = current.copy(), err
    return best


def generate_atom(rho: float, theta: float, phi: float, size: int,
                  rng: np.random.Generator, randomize_mode: str = "swap",
                  cfg: RegularityConfig = RegularityConfig()) -> Atom:
    """Build one random-bar atom for a ball point (rho, theta, phi).

    L = round(T*size) distinct rows are set white (T = theta/pi + 0.5),
    the pattern is rotated to psi = phi/2, randomized if rho < 1, and
    normalized to unit energy. L = 0 yields a flagged zero-energy atom.
    """
    if not -1e-9 <= rho <= 1.0 + 1e-6:
        raise ValueError(f"regularity {rho} outside [0, 1]")
    if not -math.pi / 2 - 1e-9 <= theta <= math.pi / 2 + 1e-9:
        raise ValueError(f"elevation {theta} outside [-pi/2, pi/2]")
    if size < 2:
        raise ValueError("atoms must be at least 2x2")
    t = theta / math.pi + 0.5
    bar_count = int(math.floor(t * size + 0.5))   # round half up
    if bar_count == 0:
        return Atom(values=np.zeros((size, size)), rho=rho, theta=theta,
                    phi=phi, zero_energy=True)
    profile = np.zeros(size)
    profile[rng.choice(size, size=bar_count, replace=False)] = 1.0
    patch = _sample_bars_rotated(profile, phi / 2.0)
    if rho < 1.0:
        patch = randomize(patch, rho, rng, mode=randomize_mode, cfg=cfg)
    energy = float(np.sum(patch * patch))
    if energy < ZERO_ENERGY_EPS:
        return Atom(values=np.zeros((size, size)), rho=rho, theta=theta,
                    phi=phi, zero_energy=True)
    return Atom(values=patch / math.sqrt(energy), rho=rho, theta=theta, phi=phi)


def generate_dictionary(code, atom_size: int, seed: int = 0,
                        randomize_mode: str = "swap",
                        cfg: RegularityConfig = RegularityConfig()) -> Dictionary:
    """One atom per constellation point, order-preserving.

    ``code`` is a SphericalCode or any (n, 3) array of points inside the
    unit ball. Each atom draws from an independent RNG stream seeded by
    (seed, point index), so regeneration is deterministic and atoms could
    be produced in parallel without changing the result.
    """
    points = np.asarray(getattr(code, "points", code), dtype=np.float64)
    if points.ndim != 2 or points.shape[1] != 3 or points.shape[0] < 1:
        raise ValueError("expected an (n, 3) constellation")
    source = getattr(code, "source", "array")
    atoms = []
    for idx, (x, y, z) in enumerate(points):
        rho, theta, phi = from_stokes(x, y, z)
        rng = np.random.default_rng([seed, idx])
        atoms.append(generate_atom(rho, theta, phi, atom_size, rng,
                                   randomize_mode=randomize_mode, cfg=cfg))
    meta = {"n_atoms": len(atoms), "atom_size": atom_size,
            "seed": seed, "source": source}
    return Dictionary(atoms=tuple(atoms), metadata=meta)


def union(d1: Dictionary, d2: Dictionary) -> Dictionary:
    """Concatenate two dictionaries (d1 first); atom sizes must match."""
    if d1.atom_size != d2.atom_size:
        raise ValueError(f"atom sizes differ: {d1.atom_size} vs {d2.atom_size}")
    meta = {"n_atoms": len(d1) + len(d2), "atom_size": d1.atom_size,
            "seed": (d1.metadata.get("seed"), d2.metadata.get("seed")),
            "source": f"union({d1.metadata.get('source')}, "
                      f"{d2.metadata.get('source')})"}
    return Dictionary(atoms=d1.atoms + d2.atoms, metadata=meta)


def save_dictionary(path, d: Dictionary, extra: dict | None = None) -> None:
    """JSON: header fields plus row-major atom values and provenance.

    ``extra`` adds top-level bookkeeping keys (run digests and the like);
    the loader ignores keys it does not know.
    """
    payload = {
        "n_atoms": len(d),
        "atom_size": d.atom_size,
        "seed": d.metadata.get("seed"),
        "source": str(d.metadata.get("source")),
        "atoms": [a.values.ravel().tolist() for a in d.atoms],
        "provenance": [{"rho": a.rho, "theta": a.theta, "phi": a.phi,
                        "zero_energy": a.zero_energy} for a in d.atoms],
    }
    if extra:
        for key, value in extra.items():
            payload.setdefault(key, value)
    with open(path, "w", encoding="ascii") as f:
        json.dump(payload, f, indent=1)
        f.write("\n")


def load_dictionary(path) -> Dictionary:
    with open(path, "r", encoding="ascii") as f:
        payload = json.load(f)
    n = int(payload["n_atoms"])
    size = int(payload["atom_size"])
    raw_atoms = payload["atoms"]
    if len(raw_atoms) != n:
        raise ValueError(f"{path}: header claims {n} atoms, found {len(raw_atoms)}")
    prov = payload.get("provenance") or [{}] * n
    atoms = []
    for vals, p in zip(raw_atoms, prov):
        v = np.asarray(vals, dtype=np.float64)
        if v.size != size * size:
            raise ValueError(f"{path}: atom has {v.size} values, expected {size * size}")
        atoms.append(Atom(values=v.reshape(size, size),
                          rho=float(p.get("rho", 1.0)),
                          theta=float(p.get("theta", 0.0)),
                          phi=float(p.get("phi", 0.0)),
                          zero_energy=bool(p.get("zero_energy", False))))
    meta = {"n_atoms": n, "atom_size": size,
            "seed": payload.get("seed"), "source": payload.get("source")}
    return Dictionary(atoms=tuple(atoms), metadata=meta)


def save_dictionary_matrix(path, d: Dictionary) -> None:
    """Plain-text matrix, one atom per column (N*N rows, n_atoms columns)."""
    m = d.matrix
    with open(path, "w", encoding="ascii") as f:
        for row in m:
            f.write(" ".join(f"{x:.17g}" for x in row) + "\n")


def load_dictionary_matrix(path) -> Dictionary:
    """Read the one-atom-per-column text format; size inferred from rows."""
    m = np.loadtxt(path, dtype=np.float64, ndmin=2)
    d = m.shape[0]
    size = int(round(math.sqrt(d)))
    if size * size != d:
        raise ValueError(f"{path}: {d} rows is not a square atom length")
    atoms = []
    for col in m.T:
        energy = float(np.sum(col * col))
        zero = energy < ZERO_ENERGY_EPS
        # external toolboxes do not guarantee unit energy; normalize here
        vals = col if zero else col / math.sqrt(energy)
        atoms.append(Atom(values=vals.reshape(size, size), rho=1.0, theta=0.0,
                          phi=0.0, zero_energy=zero))
    meta = {"n_atoms": len(atoms), "atom_size": size, "seed": None,
            "source": f"loaded({path})"}
    return Dictionary(atoms=tuple(atoms), metadata=meta)


def atom_sheet(d: Dictionary, columns: int | None = None,
               separator: float = 128.0) -> np.ndarray:
    """Tile rescaled atoms into one inspection image with 1-px separators."""
    n = len(d)
    cols = columns or max(1, int(math.ceil(math.sqrt(n))))
    rows = (n + cols - 1) // cols
    size = d.atom_size
    sheet = np.full((rows * (size + 1) + 1, cols * (size + 1) + 1), separator)
    for idx, atom in enumerate(d.atoms):
        r, c = divmod(idx, cols)
        i0 = 1 + r * (size + 1)
        j0 = 1 + c * (size + 1)
        sheet[i0:i0 + size, j0:j0 + size] = rescale_for_encoding(atom.values)
    return sheet
