"""Acceptance gate: nine end-to-end criteria, one verdict line apiece.

Each test pins its tolerances and seeds inline and reports measured
numbers through the ``criterion`` recorder (see conftest.py). Criterion 8
has two parts: the relative protocol runs on a bundled reference image;
the absolute-level check needs the four standard 512x512 test images and
skips honestly when they are not installed (drop barbara/boat/house/
peppers as .pgm or .png into images/ at the repo root, or point
PATCHSPHERE_IMAGE_DIR at a directory containing them).
"""

import math
import os
import time
from pathlib import Path

import numpy as np
import pytest

from patchsphere.bardict import generate_atom, generate_dictionary, union
from patchsphere.encoder import (RegularityConfig, elevation_from_intensity,
                                 encode_patch, from_stokes,
                                 normalized_mean_intensity,
                                 rescale_for_encoding, to_stokes)
from patchsphere.imageio import read_image
from patchsphere.orientation import (_proj_d1_rect, _proj_d1_square,
                                     _proj_d2_rect, _proj_d2_square,
                                     brute_force_projector,
                                     dominant_orientation, projector,
                                     projector_set, psi_from_projectors,
                                     zero_mean)
from patchsphere.patches import Patch
from patchsphere.regularity import ldc_regularity, regularity, rho_entropy
from patchsphere.sparse import reconstruct
from patchsphere.spherecodes import (bundled_code_path,
                                     generate_spherical_code,
                                     load_spherical_code)
from patchsphere.synthetic import (add_noise, eight_patch_fixture,
                                   gaussian_line_patch, line_patch,
                                   reshuffle, rotate_patch,
                                   rotated_line_sequence, stripe_patch)

ANGLES = tuple(float(a) for a in range(0, 180, 10))

STANDARD_IMAGES = ("barbara", "boat", "house", "peppers")
#: expected PSNR (dB) for a 256-point dictionary, 8x8 atoms, k=5, stride 1
EXPECTED_PSNR_DB = {"barbara": 31.74, "boat": 33.63,
                    "house": 36.58, "peppers": 35.55}


def circular_error_deg(a: float, b: float, period: float = 180.0) -> float:
    d = abs(a - b) % period
    return min(d, period - d)


def _dyadic_mirror_pair(rng, half: int):
    """A square patch of +/-{0.5, 1} values with exact zero sum, plus its
    left-right mirror. All ray sums are exact in binary floating point, so
    projector symmetry can be asserted bitwise."""
    left = rng.choice([-1.0, -0.5, 0.5, 1.0], size=(2 * half, half))
    patch = np.hstack([left, -left[:, ::-1]])
    return patch, patch[:, ::-1]


def test_criterion_1_clean_sequences_and_mirror_symmetry(criterion):
    with criterion(1, "clean orientation sequences + exact mirror symmetry") as c:
        start = time.perf_counter()
        worst = 0.0
        for size in (5, 9, 11):
            base = gaussian_line_patch(size, sigma=size / 4.0)
            for angle in ANGLES:
                patch = rotate_patch(base, math.radians(angle))
                est = dominant_orientation(patch)
                worst = max(worst,
                            circular_error_deg(math.degrees(est.psi), angle))
        assert worst <= 10.0

        rng = np.random.default_rng(5)
        for _ in range(40):
            patch, mirror = _dyadic_mirror_pair(rng, int(rng.integers(1, 7)))
            w, wm = zero_mean(patch), zero_mean(mirror)
            # mirroring maps psi -> 180deg - psi: h/v stay put, d1/d2 swap
            assert projector(w, "h") == projector(wm, "h")
            assert projector(w, "v") == projector(wm, "v")
            assert projector(w, "d1") == projector(wm, "d2")
            assert projector(w, "d2") == projector(wm, "d1")
        elapsed = time.perf_counter() - start
        assert elapsed < 1.0
        c.note(f"worst {worst:.2f} deg <= 10 deg on 5/9/11 px sequences, "
               f"mirror swap bitwise, {elapsed:.2f} s < 1 s")


def test_criterion_2_noisy_orientation(criterion):
    with criterion(2, "orientation under heavy noise") as c:
        start = time.perf_counter()
        per_seed = []
        for seed in range(20):
            errs = []
            for i, (angle, patch) in enumerate(rotated_line_sequence(21, ANGLES)):
                noisy = add_noise(patch, 0.0, np.random.default_rng([seed, i]))
                est = dominant_orientation(noisy)
                errs.append(circular_error_deg(math.degrees(est.psi), angle))
            per_seed.append(float(np.mean(errs)))
        mae = float(np.mean(per_seed))
        elapsed = time.perf_counter() - start
        assert mae < 20.0
        assert elapsed < 10.0
        c.note(f"SNR 0 dB, 21x21: mean abs error {mae:.2f} deg < 20 deg "
               f"over 20 seeds, {elapsed:.2f} s < 10 s")


def test_criterion_3_closed_form_matches_ray_oracle(criterion):
    with criterion(3, "closed-form projectors vs brute-force ray oracle") as c:
        start = time.perf_counter()
        rng = np.random.default_rng(3)
        worst = 0.0
        squares = 0
        for trial in range(1000):
            m = int(rng.integers(2, 22))
            n = m if trial % 3 == 0 else int(rng.integers(2, 18))
            w = zero_mean(rng.uniform(0.0, 255.0, (m, n)))
            for d in ("h", "v", "d1", "d2"):
                worst = max(worst,
                            abs(projector(w, d) - brute_force_projector(w, d)))
            if m == n:
                squares += 1
                assert _proj_d1_square(w.values) == _proj_d1_rect(w.values)
                assert _proj_d2_square(w.values) == _proj_d2_rect(w.values)
        elapsed = time.perf_counter() - start
        assert worst <= 1e-12
        assert squares >= 300
        assert elapsed < 30.0
        c.note(f"1000 patches 2x2..21x17: worst gap {worst:.1e} <= 1e-12, "
               f"square==rect bitwise on {squares} squares, "
               f"{elapsed:.2f} s < 30 s")


def test_criterion_4_normalization_invariants(criterion):
    with criterion(4, "normalization and radius invariants") as c:
        rng = np.random.default_rng(4)
        checked = 0
        for _ in range(4000):
            m = int(rng.integers(3, 13))
            n = int(rng.integers(3, 13))
            ps = projector_set(zero_mean(rng.uniform(0.0, 255.0, (m, n))))
            if ps.degenerate_hv or ps.degenerate_diag:
                continue
            checked += 1
            assert abs(ps.r_h ** 2 + ps.r_v ** 2 - 1.0) <= 1e-12
            assert abs(ps.r_d1 ** 2 + ps.r_d2 ** 2 - 1.0) <= 1e-12
            psi = psi_from_projectors(ps.r_h, ps.r_v, ps.r_d1, ps.r_d2)
            total = math.sqrt(ps.raw_h ** 2 + ps.raw_v ** 2
                              + ps.raw_d1 ** 2 + ps.raw_d2 ** 2)
            alt = (ps.raw_h / total, ps.raw_v / total,
                   ps.raw_d1 / total, ps.raw_d2 / total)
            assert abs(psi_from_projectors(*alt) - psi) <= 1e-12

        count = 6000
        rho = rng.uniform(0.0, 1.0, count)
        psi = rng.uniform(0.0, math.pi, count)
        chi = rng.uniform(-math.pi / 4.0, math.pi / 4.0, count)
        s1, s2, s3 = to_stokes(rho, psi, chi)
        radius_gap = float(np.max(np.abs(s1 * s1 + s2 * s2 + s3 * s3
                                         - rho * rho)))
        assert radius_gap <= 1e-12
        assert checked + count >= 10_000
        c.note(f"{checked} patches: unit pair norms + four-way psi invariance "
               f"<= 1e-12; {count} points: radius gap {radius_gap:.1e}")


def test_criterion_5_constellation_separation(criterion):
    with criterion(5, "constellation radii split and ring separation") as c:
        points = [encode_patch(p, label=l) for l, p in eight_patch_fixture()]
        high = [p for p in points if p.rho >= 0.9]
        low = [p for p in points if p.rho <= 0.2]
        assert len(high) == 7 and len(low) == 1

        base = line_patch(21, thickness=5, hi=192.0, lo=96.0)
        clean, degraded = [], []
        for i, angle in enumerate(ANGLES):
            rotated = rotate_patch(base, math.radians(angle), fill=96.0)
            clean.append(rho_entropy(Patch(rotated)))
            noisy = add_noise(rotated, 0.0, np.random.default_rng([11, i]))
            degraded.append(rho_entropy(Patch(noisy)))
        assert min(clean) > max(degraded)
        c.note(f"eight-patch fixture: 7 points rho >= 0.9, 1 point rho <= 0.2; "
               f"rings: min clean {min(clean):.3f} > "
               f"max degraded {max(degraded):.3f}")


def test_criterion_6_round_trip_and_atom_consistency(criterion):
    with criterion(6, "coordinate round trip and atom re-encoding") as c:
        rng = np.random.default_rng(6)
        count = 10_000
        rho = rng.uniform(0.05, 1.0, count)
        psi = rng.uniform(0.0, math.pi, count)
        chi = rng.uniform(-0.245 * math.pi, 0.245 * math.pi, count)
        s1, s2, s3 = to_stokes(rho, psi, chi)
        rho2, theta2, phi2 = from_stokes(s1, s2, s3)
        assert float(np.max(np.abs(rho2 - rho))) <= 1e-9
        assert float(np.max(np.abs(theta2 - 2.0 * chi))) <= 1e-9
        dphi = np.abs(np.mod(phi2 - 2.0 * psi + math.pi, 2.0 * math.pi)
                      - math.pi)
        assert float(np.max(dphi)) <= 1e-9

        # Atoms are stochastic textures, so individual estimates scatter;
        # the recovered cloud must stay centred on the target coordinates.
        targets = np.random.default_rng(0)
        az_errs, th_errs = [], []
        for i in range(200):
            target_psi = targets.uniform(0.0, math.pi)
            target_theta = targets.uniform(-math.pi / 3.0, math.pi / 3.0)
            atom = generate_atom(1.0, target_theta, 2.0 * target_psi, 32,
                                 np.random.default_rng([0, i]))
            patch = Patch(rescale_for_encoding(atom.values))
            est = dominant_orientation(patch)
            az_errs.append(circular_error_deg(
                math.degrees(2.0 * est.psi), math.degrees(2.0 * target_psi),
                period=360.0))
            recovered = elevation_from_intensity(
                normalized_mean_intensity(patch))
            th_errs.append(abs(recovered - target_theta))
        az = np.asarray(az_errs)
        th = np.asarray(th_errs)
        assert float(az.mean()) <= 15.0 and float(np.median(az)) <= 15.0
        assert float(th.mean()) <= 0.15 and float(np.median(th)) <= 0.15
        c.note(f"10^4 round trips <= 1e-9; 200 atoms (32 px, |theta| <= pi/3): "
               f"azimuth mean {az.mean():.1f} / median {np.median(az):.1f} deg "
               f"<= 15, theta mean {th.mean():.3f} / median {np.median(th):.3f}"
               f" <= 0.15 rad")


def test_criterion_7_spherical_code_optima(criterion):
    with criterion(7, "small-code optima and monotone improvement") as c:
        start = time.perf_counter()
        gaps = {}
        for n, target, tol in ((2, 2.0, 1e-6),
                               (4, math.sqrt(8.0 / 3.0), 1e-3),
                               (6, math.sqrt(2.0), 1e-3)):
            code = generate_spherical_code(n, seed=0)
            gaps[n] = abs(code.min_chordal_distance - target)
            assert gaps[n] <= tol
        for n in (16, 72, 256):
            history = np.asarray(generate_spherical_code(n, seed=0).history)
            assert np.all(np.diff(history) >= 0.0)
        elapsed = time.perf_counter() - start
        assert elapsed < 60.0
        c.note(f"n=2/4/6 optima hit (gaps {gaps[2]:.1e}/{gaps[4]:.1e}/"
               f"{gaps[6]:.1e}); history non-decreasing for n=16/72/256; "
               f"{elapsed:.1f} s < 60 s")


def test_criterion_8_dictionary_comparison_protocol(criterion):
    with criterion(8, "dictionary comparison protocol") as c:
        data = pytest.importorskip(
            "skimage.data", reason="reference image needs scikit-image")
        start = time.perf_counter()
        image = data.camera().astype(np.float64)

        code256 = generate_spherical_code(256, seed=0)
        d1 = generate_dictionary(code256, atom_size=8, seed=1)
        d2 = generate_dictionary(code256, atom_size=8, seed=2)
        both = union(d1, d2)
        large_code = load_spherical_code(bundled_code_path())
        large = generate_dictionary(large_code, atom_size=8, seed=1)

        psnr = {}
        for name, d in (("one", d1), ("two", d2),
                        ("union", both), ("large", large)):
            psnr[name] = reconstruct(image, d, k=5, stride=1)[1].psnr_db
        elapsed = time.perf_counter() - start

        assert abs(psnr["one"] - psnr["two"]) < 0.3
        assert psnr["union"] >= psnr["one"] + 0.5
        assert psnr["union"] >= psnr["two"] + 0.5
        assert psnr["large"] >= psnr["union"] + 0.4
        assert elapsed < 1800.0
        c.note(f"512x512 reference image, 8x8 atoms, k=5, stride 1: "
               f"seeds {psnr['one']:.2f}/{psnr['two']:.2f} dB (gap < 0.3), "
               f"union {psnr['union']:.2f} (gain >= 0.5), "
               f"large {psnr['large']:.2f} (gain >= 0.4), "
               f"{elapsed:.0f} s < 1800 s")


def _find_standard_images() -> dict:
    roots = []
    env = os.environ.get("PATCHSPHERE_IMAGE_DIR")
    if env:
        roots.append(Path(env))
    roots.append(Path(__file__).resolve().parent.parent / "images")
    found = {}
    for root in roots:
        if not root.is_dir():
            continue
        for name in STANDARD_IMAGES:
            if name in found:
                continue
            for ext in (".pgm", ".png"):
                candidate = root / f"{name}{ext}"
                if candidate.exists():
                    found[name] = candidate
                    break
    return found


def test_criterion_8_absolute_levels_on_standard_images(criterion):
    with criterion(8, "absolute PSNR levels on the standard images") as c:
        found = _find_standard_images()
        missing = [n for n in STANDARD_IMAGES if n not in found]
        if missing:
            pytest.skip("absolute PSNR comparison needs the standard 512x512 "
                        f"images; missing {', '.join(missing)} (searched "
                        "images/ and PATCHSPHERE_IMAGE_DIR)")
        code256 = generate_spherical_code(256, seed=0)
        d = generate_dictionary(code256, atom_size=8, seed=1)
        gaps = {}
        for name, path in sorted(found.items()):
            got = reconstruct(read_image(path), d, k=5, stride=1)[1].psnr_db
            gaps[name] = got - EXPECTED_PSNR_DB[name]
            assert abs(gaps[name]) <= 1.0, (name, got)
        c.note("absolute levels within 1.0 dB: " + ", ".join(
            f"{n} {g:+.2f}" for n, g in gaps.items()))


def test_criterion_9_regularity_boundaries(criterion):
    with criterion(9, "regularity endpoints and reshuffle monotonicity") as c:
        assert rho_entropy(Patch(np.full((16, 16), 128.0))) == 1.0
        all_levels = np.arange(256, dtype=np.float64).reshape(16, 16)
        assert rho_entropy(Patch(all_levels)) == 0.0
        assert ldc_regularity(1, 18) == 1.0
        assert ldc_regularity(18, 18) == 0.0

        stripes = stripe_patch(32, "h", period=4)
        cfg = RegularityConfig(estimator="ldc")
        base = regularity(Patch(stripes), cfg)
        rng = np.random.default_rng(9)
        shuffled_values = []
        for _ in range(50):
            shuffled = reshuffle(stripes, rng)
            value = regularity(Patch(shuffled), cfg)
            assert value <= base + 1e-12
            shuffled_values.append(value)
        # destroys the stripes, so consistency actually drops on average
        assert float(np.mean(shuffled_values)) < base
        c.note(f"entropy endpoints 1.0/0.0, LDC endpoints 1.0/0.0 exact; "
               f"50 reshuffles never exceed stripe value {base:.2f} "
               f"(mean {np.mean(shuffled_values):.2f})")
