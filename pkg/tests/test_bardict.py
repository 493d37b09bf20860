import math

import numpy as np
import pytest

from patchsphere.bardict import (Atom, Dictionary, atom_sheet, generate_atom,
                                 generate_dictionary, load_dictionary,
                                 load_dictionary_matrix, randomize,
                                 save_dictionary, save_dictionary_matrix,
                                 union, _sample_bars_rotated)
from patchsphere.encoder import rescale_for_encoding
from patchsphere.regularity import RegularityConfig, rho_entropy
from patchsphere.patches import Patch


def rng_for(idx):
    return np.random.default_rng([42, idx])


def test_atom_energy_invariant():
    with pytest.raises(ValueError):
        Atom(values=np.ones((4, 4)), rho=1.0, theta=0.0, phi=0.0)
    ok = Atom(values=np.ones((4, 4)) / 4.0, rho=1.0, theta=0.0, phi=0.0)
    assert ok.size == 4


def test_bar_count_follows_elevation():
    # T = theta/pi + 0.5; bar count is round(T * N), half up
    for theta, expected in ((-math.pi / 2, 0), (0.0, 4), (math.pi / 2, 8)):
        atom = generate_atom(1.0, theta, 0.0, 8, rng_for(0))
        bars = expected if expected else 0
        if bars == 0:
            assert atom.zero_energy
        else:
            assert np.count_nonzero(atom.values.sum(axis=1)) == bars


def test_zero_elevation_unrotated_bars_exact():
    atom = generate_atom(1.0, 0.0, 0.0, 8, rng_for(1))
    # psi = 0: horizontal bars, every row constant
    assert np.all((atom.values == atom.values[:, :1]))
    assert math.isclose(float((atom.values ** 2).sum()), 1.0, abs_tol=1e-9)


def test_rotation_keeps_bars_single_valued():
    bars = np.zeros(16)
    bars[[2, 7, 11]] = 1.0
    rotated = _sample_bars_rotated(bars, 0.7)
    assert set(np.unique(rotated)) <= {0.0, 1.0}   # nearest-row sampling
    assert np.array_equal(_sample_bars_rotated(bars, 0.0),
                          np.tile(bars[:, None], (1, 16)))


def test_generate_atom_validation():
    with pytest.raises(ValueError):
        generate_atom(1.2, 0.0, 0.0, 8, rng_for(2))
    with pytest.raises(ValueError):
        generate_atom(1.0, 2.0, 0.0, 8, rng_for(2))
    with pytest.raises(ValueError):
        generate_atom(1.0, 0.0, 0.0, 1, rng_for(2))


def test_randomize_noise_lowers_entropy_regularity():
    values = np.tile(np.array([0.0, 1.0])[:, None], (4, 8))
    before = rho_entropy(Patch(rescale_for_encoding(values)))
    out = randomize(values, 0.3, np.random.default_rng(0), mode="noise")
    after = rho_entropy(Patch(rescale_for_encoding(out)))
    assert after < before
    with pytest.raises(ValueError):
        randomize(values, 0.5, np.random.default_rng(0), mode="bogus")


def test_dictionary_determinism_and_usable():
    points = np.array([[0.0, 0.0, 1.0], [1.0, 0.0, 0.0], [0.0, 0.0, -1.0]])
    d1 = generate_dictionary(points, atom_size=8, seed=9)
    d2 = generate_dictionary(points, atom_size=8, seed=9)
    for a, b in zip(d1.atoms, d2.atoms):
        assert np.array_equal(a.values, b.values)
    # south pole: T=0 -> no bars -> unusable
    assert list(d1.usable) == [True, True, False]
    assert d1.matrix.shape == (64, 3)


def test_union_preserves_order():
    points = np.array([[1.0, 0.0, 0.0], [0.0, 1.0, 0.0]])
    d1 = generate_dictionary(points, atom_size=4, seed=1)
    d2 = generate_dictionary(points, atom_size=4, seed=2)
    u = union(d1, d2)
    assert len(u) == 4
    assert np.array_equal(u.atoms[0].values, d1.atoms[0].values)
    assert np.array_equal(u.atoms[2].values, d2.atoms[0].values)
    with pytest.raises(ValueError):
        union(d1, generate_dictionary(points, atom_size=8, seed=1))


def test_save_load_round_trip(tmp_path):
    points = np.array([[0.6, 0.0, 0.8], [0.0, -1.0, 0.0]])
    d = generate_dictionary(points, atom_size=6, seed=4)
    path = tmp_path / "dict.json"
    save_dictionary(path, d, extra={"note": "x"})
    loaded = load_dictionary(path)
    assert len(loaded) == 2 and loaded.atom_size == 6
    for a, b in zip(d.atoms, loaded.atoms):
        assert np.allclose(a.values, b.values, atol=0)
        assert a.zero_energy == b.zero_energy


def test_matrix_round_trip_renormalizes(tmp_path):
    points = np.array([[1.0, 0.0, 0.0], [0.0, 1.0, 0.0]])
    d = generate_dictionary(points, atom_size=4, seed=5)
    path = tmp_path / "dict.txt"
    save_dictionary_matrix(path, d)
    loaded = load_dictionary_matrix(path)
    assert np.allclose(loaded.matrix, d.matrix, atol=1e-12)


def test_atom_sheet_layout():
    points = np.tile(np.array([[1.0, 0.0, 0.0]]), (6, 1))
    d = generate_dictionary(points, atom_size=4, seed=6)
    sheet = atom_sheet(d, columns=3)
    # 2 rows x 3 cols of 4px tiles, 1px separators plus a 1px outer border
    assert sheet.shape == (2 * 5 + 1, 3 * 5 + 1)
