import math

import numpy as np
import pytest

from patchsphere.synthetic import (add_noise, checkerboard, constant_patch,
                                   eight_patch_fixture, gaussian_line_patch,
                                   line_patch, noise_patch, patch_mosaic,
                                   reshuffle, rotate_patch,
                                   rotated_line_sequence, stripe_patch)


def test_stripe_directions():
    h = stripe_patch(6, "h")
    assert np.all(h[0] == h[0, 0]) and h[0, 0] != h[1, 0]
    v = stripe_patch(6, "v")
    assert np.array_equal(v, h.T)
    d1 = stripe_patch(6, "d1", period=3)
    # constant along i - j
    assert d1[0, 0] == d1[1, 1] == d1[2, 2]
    d2 = stripe_patch(6, "d2", period=3)
    assert d2[0, 2] == d2[1, 1] == d2[2, 0]
    with pytest.raises(ValueError):
        stripe_patch(6, "x")


def test_checkerboard_alternates():
    cb = checkerboard(4)
    assert cb[0, 0] != cb[0, 1] and cb[0, 0] == cb[1, 1]


def test_line_patch_geometry():
    single = line_patch(9, thickness=1, hi=255.0)
    assert np.all(single[4] == 255.0)
    assert single.sum() == 9 * 255.0
    thick = line_patch(9, thickness=3, hi=10.0, lo=1.0)
    assert np.all(thick[3:6] == 10.0) and np.all(thick[0:3] == 1.0)


def test_gaussian_line_profile():
    g = gaussian_line_patch(11)
    center = (11 - 1) / 2
    assert g[5, 0] == g[:, 0].max()           # peak at the center row
    assert g[0, 0] == g[10, 0]                # symmetric tails
    assert g[5, 0] == pytest.approx(255.0)


def test_rotate_patch_basics():
    v = line_patch(9, thickness=1, hi=200.0)
    assert np.array_equal(rotate_patch(v, 0.0), v)   # identity at 0
    r90 = rotate_patch(v, math.pi / 2)
    assert np.all(np.abs(r90[:, 4] - 200.0) < 1e-9)  # row becomes column


def test_add_noise_snr_calibration():
    rng = np.random.default_rng(0)
    v = stripe_patch(64, "h")
    noisy = add_noise(v, 0.0, rng)
    measured = 10 * math.log10(np.var(v) / np.var(noisy - v))
    assert abs(measured) < 1.0                # 0 dB within 1 dB at 64x64
    with pytest.raises(ValueError):
        add_noise(constant_patch(8, 5.0), 0.0, rng)


def test_reshuffle_preserves_multiset():
    rng = np.random.default_rng(1)
    v = stripe_patch(8, "v")
    r = reshuffle(v, rng)
    assert not np.array_equal(r, v)
    assert np.array_equal(np.sort(r.ravel()), np.sort(v.ravel()))


def test_eight_patch_fixture_composition():
    pairs = eight_patch_fixture()
    assert [label for label, _ in pairs] == [
        "black", "white", "gray", "stripes_h", "stripes_v",
        "stripes_d1", "stripes_d2", "noise"]
    for _, values in pairs:
        assert values.shape == (64, 64)
        assert values.min() >= 0.0 and values.max() <= 255.0


def test_rotated_line_sequence_angles():
    seq = rotated_line_sequence(9, [0, 90])
    assert [angle for angle, _ in seq] == [0, 90]
    assert np.array_equal(seq[0][1], line_patch(9))


def test_patch_mosaic_tiling():
    tiles = [constant_patch(4, float(v)) for v in (1, 2, 3, 4)]
    mosaic = patch_mosaic(tiles, (2, 2))
    assert mosaic.shape == (8, 8)
    assert mosaic[0, 0] == 1.0 and mosaic[7, 7] == 4.0


def test_noise_patch_range():
    v = noise_patch(16, np.random.default_rng(2))
    assert v.min() >= 0 and v.max() <= 255
    assert len(np.unique(v)) > 100
