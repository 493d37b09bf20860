"""Command-line surface for the whole pipeline.

Subcommands: ``encode`` (patches → sphere constellation), ``cluster``
(labeled region sampling), ``gen-code`` (spherical codes), ``gen-dict``
(bar-atom dictionaries + atom sheet), ``reconstruct`` (OMP reconstruction,
multiple dictionaries unioned) and ``eval-table1`` (the four-dictionary
PSNR table).

Parameters come from flags and/or a ``key = value`` config file; flags
win. Every output embeds the sha256 digest of the effective configuration
and the master seed, so a rerun with the same config byte-reproduces the
CSV/JSON outputs (the reconstruction report's ``seconds`` field is wall
time and exempt). Exit codes: 0 success, 1 usage, 2 I/O, 3 violated
numeric contract.
"""
from __future__ import annotations

import argparse
import hashlib
import json
import math
import sys
from pathlib import Path

import numpy as np

from .bardict import (atom_sheet, generate_dictionary, load_dictionary,
                      save_dictionary, union)
from .encoder import encode_collection
from .imageio import read_image, write_pgm
from .patches import patch_positions
from .regularity import RegularityConfig
from .sparse import reconstruct
from .spherecodes import (generate_spherical_code, load_spherical_code,
                          save_spherical_code)
from . import synthetic


class UsageError(Exception):
    """Bad invocation: wrong flags, out-of-range parameters, bad regions."""


class _Parser(argparse.ArgumentParser):
    # argparse exits 2 on bad usage; the contract here reserves 2 for I/O.
    def error(self, message):
        self.print_usage(sys.stderr)
        sys.stderr.write(f"error: {message}\n")
        raise SystemExit(1)


# ---------------------------------------------------------------- config

def _read_config(path: str) -> dict[str, str]:
    values: dict[str, str] = {}
    with open(path, "r", encoding="utf-8") as f:
        for lineno, line in enumerate(f, start=1):
            text = line.split("#", 1)[0].strip()
            if not text:
                continue
            if "=" not in text:
                raise UsageError(f"{path}:{lineno}: expected key = value")
            key, _, value = text.partition("=")
            values[key.strip()] = value.strip()
    return values


def _merge_config(args: argparse.Namespace, schema: dict) -> dict:
    """Flags override config-file entries; unset keys take defaults."""
    file_cfg = _read_config(args.config) if getattr(args, "config", None) else {}
    unknown = set(file_cfg) - set(schema)
    if unknown:
        raise UsageError(f"unknown config keys: {', '.join(sorted(unknown))}")
    merged = {}
    for key, (parse, default) in schema.items():
        flag_value = getattr(args, key.replace("-", "_"), None)
        if flag_value is not None and flag_value != []:
            merged[key] = flag_value
        elif key in file_cfg:
            try:
                merged[key] = parse(file_cfg[key])
            except ValueError:
                raise UsageError(f"config key {key!r}: bad value "
                                 f"{file_cfg[key]!r}") from None
        else:
            merged[key] = default
    return merged


def _digest(subcommand: str, cfg: dict) -> str:
    lines = [subcommand] + [f"{k}={cfg[k]}" for k in sorted(cfg)]
    return hashlib.sha256("\n".join(lines).encode("utf-8")).hexdigest()


def _strlist(text: str) -> list[str]:
    return [part.strip() for part in text.split(",") if part.strip()]


# ---------------------------------------------------------------- encode

def _demo_patches(kind: str, seed: int):
    if kind == "eight":
        pairs = synthetic.eight_patch_fixture(seed=seed)
        return [v for _, v in pairs], [label for label, _ in pairs]
    if kind == "rings":
        patches, labels = [], []
        base = synthetic.line_patch(21, thickness=5, hi=192.0, lo=96.0)
        for i, angle in enumerate(range(0, 180, 10)):
            clean = synthetic.rotate_patch(base, math.radians(angle), fill=96.0)
            rng = np.random.default_rng([seed, i])
            patches += [clean, synthetic.add_noise(clean, 0.0, rng)]
            labels += ["clean", "degraded"]
        return patches, labels
    raise UsageError(f"unknown demo fixture {kind!r}")


def cmd_encode(args) -> int:
    schema = {"image": (str, None), "demo": (str, None), "out": (str, None),
            "patch-size": (int, 8), "stride": (int, None),
            "estimator": (str, "entropy"), "seed": (int, 0)}
    cfg = _merge_config(args, schema)
    if not cfg["out"]:
        raise UsageError("--out is required")
    if (cfg["image"] is None) == (cfg["demo"] is None):
        raise UsageError("exactly one of --image / --demo is required")
    if cfg["estimator"] not in ("entropy", "ldc"):
        raise UsageError(f"unknown estimator {cfg['estimator']!r}")
    digest = _digest("encode", cfg)
    rcfg = RegularityConfig(estimator=cfg["estimator"])

    if cfg["demo"]:
        patches, labels = _demo_patches(cfg["demo"], cfg["seed"])
    else:
        image = read_image(cfg["image"])
        size = cfg["patch-size"]
        stride = cfg["stride"] or size
        if size > min(image.shape):
            raise UsageError(f"patch size {size} exceeds image {image.shape}")
        positions = patch_positions(image.shape, size, stride)
        patches = [image[i:i + size, j:j + size] for i, j in positions]
        labels = [f"r{i}_c{j}" for i, j in positions]
    constellation = encode_collection(
        patches, cfg=rcfg, labels=labels,
        metadata={"command": "encode", "config_sha256": digest,
                  "seed": cfg["seed"]})
    _write_constellation(cfg["out"], constellation)
    print(f"encoded {len(constellation)} patches -> {cfg['out']}")
    return 0


def _write_constellation(out: str, constellation) -> None:
    text = (constellation.to_json() if out.endswith(".json")
            else constellation.to_csv())
    with open(out, "w", encoding="utf-8") as f:
        f.write(text)


# --------------------------------------------------------------- cluster

def _parse_region(text: str) -> tuple[str, int, int, int, int]:
    label, _, rect = text.partition(":")
    parts = rect.split(",")
    if not label or len(parts) != 4:
        raise UsageError(f"region {text!r}: expected LABEL:TOP,LEFT,HEIGHT,WIDTH")
    try:
        top, left, height, width = (int(p) for p in parts)
    except ValueError:
        raise UsageError(f"region {text!r}: non-integer geometry") from None
    return label, top, left, height, width


def cmd_cluster(args) -> int:
    schema = {"image": (str, None), "out": (str, None),
            "patch-size": (int, 8), "samples": (int, 32),
            "regions": (_strlist, []), "estimator": (str, "entropy"),
            "seed": (int, 0)}
    cfg = _merge_config(args, schema)
    if not cfg["image"] or not cfg["out"]:
        raise UsageError("--image and --out are required")
    if not cfg["regions"]:
        raise UsageError("at least one --region LABEL:TOP,LEFT,H,W is required")
    if cfg["samples"] < 1:
        raise UsageError("--samples must be >= 1")
    if cfg["estimator"] not in ("entropy", "ldc"):
        raise UsageError(f"unknown estimator {cfg['estimator']!r}")
    digest = _digest("cluster", cfg)

    image = read_image(cfg["image"])
    size = cfg["patch-size"]
    patches, labels = [], []
    for index, region in enumerate(cfg["regions"]):
        label, top, left, height, width = _parse_region(region)
        if top < 0 or left < 0 or height < 1 or width < 1 \
                or top + height > image.shape[0] or left + width > image.shape[1]:
            raise UsageError(f"region {label!r} is outside the image")
        if height < size or width < size:
            raise UsageError(f"region {label!r} is smaller than the patch size")
        rng = np.random.default_rng([cfg["seed"], index])
        rows = rng.integers(top, top + height - size + 1, size=cfg["samples"])
        cols = rng.integers(left, left + width - size + 1, size=cfg["samples"])
        for i, j in zip(rows, cols):
            patches.append(image[i:i + size, j:j + size])
            labels.append(label)
    constellation = encode_collection(
        patches, cfg=RegularityConfig(estimator=cfg["estimator"]),
        labels=labels,
        metadata={"command": "cluster", "config_sha256": digest,
                  "seed": cfg["seed"]})
    _write_constellation(cfg["out"], constellation)
    print(f"encoded {len(constellation)} samples from "
          f"{len(cfg['regions'])} regions -> {cfg['out']}")
    return 0


# -------------------------------------------------------------- gen-code

def cmd_gen_code(args) -> int:
    schema = {"n": (int, None), "load": (str, None), "out": (str, None),
            "iters": (int, 2000), "seed": (int, 0)}
    cfg = _merge_config(args, schema)
    if not cfg["out"]:
        raise UsageError("--out is required")
    if (cfg["n"] is None) == (cfg["load"] is None):
        raise UsageError("exactly one of --n / --load is required")
    if cfg["n"] is not None and cfg["n"] < 2:
        raise UsageError("--n must be at least 2")
    digest = _digest("gen-code", cfg)

    if cfg["load"]:
        code = load_spherical_code(cfg["load"])
    else:
        code = generate_spherical_code(cfg["n"], seed=cfg["seed"],
                                       max_iters=cfg["iters"])
    save_spherical_code(cfg["out"], code, comments=(
        f"config_sha256={digest}", f"seed={cfg['seed']}",
        f"source={code.source}",
        f"min_chordal_distance={code.min_chordal_distance:.12f}"))
    print(f"{code.size} points, min chordal distance "
          f"{code.min_chordal_distance:.6f} -> {cfg['out']}")
    return 0


# -------------------------------------------------------------- gen-dict

def cmd_gen_dict(args) -> int:
    schema = {"code": (str, None), "atom-size": (int, 8), "out": (str, None),
            "sheet": (str, None), "randomize": (str, "swap"),
            "seed": (int, 0)}
    cfg = _merge_config(args, schema)
    if not cfg["code"] or not cfg["out"]:
        raise UsageError("--code and --out are required")
    if cfg["atom-size"] < 2:
        raise UsageError("--atom-size must be at least 2")
    if cfg["randomize"] not in ("swap", "noise"):
        raise UsageError(f"unknown randomize mode {cfg['randomize']!r}")
    digest = _digest("gen-dict", cfg)

    code = load_spherical_code(cfg["code"])
    dictionary = generate_dictionary(code, atom_size=cfg["atom-size"],
                                     seed=cfg["seed"],
                                     randomize_mode=cfg["randomize"])
    save_dictionary(cfg["out"], dictionary,
                    extra={"config_sha256": digest, "master_seed": cfg["seed"]})
    sheet_path = cfg["sheet"] or str(Path(cfg["out"]).with_suffix("")) + "_atoms.pgm"
    write_pgm(sheet_path, atom_sheet(dictionary),
              comment=f"config_sha256={digest} seed={cfg['seed']}")
    print(f"{len(dictionary)} atoms ({cfg['atom-size']}x{cfg['atom-size']}) "
          f"-> {cfg['out']} (sheet: {sheet_path})")
    return 0


# ----------------------------------------------------------- reconstruct

def _load_union(paths: list[str]):
    dictionary = load_dictionary(paths[0])
    for path in paths[1:]:
        dictionary = union(dictionary, load_dictionary(path))
    dict_id = "+".join(Path(p).stem for p in paths)
    return dictionary, dict_id


def cmd_reconstruct(args) -> int:
    schema = {"image": (str, None), "dicts": (_strlist, []), "k": (int, 5),
            "stride": (int, 1), "out": (str, None), "report": (str, None),
            "seed": (int, 0)}
    cfg = _merge_config(args, schema)
    if not cfg["image"] or not cfg["dicts"] or not cfg["out"]:
        raise UsageError("--image, --dict and --out are required")
    if cfg["k"] < 1:
        raise UsageError("--k must be >= 1")
    if cfg["stride"] < 1:
        raise UsageError("--stride must be >= 1")
    digest = _digest("reconstruct", cfg)

    image = read_image(cfg["image"])
    dictionary, dict_id = _load_union(cfg["dicts"])
    recon, report = reconstruct(image, dictionary, k=cfg["k"],
                                stride=cfg["stride"],
                                image_name=cfg["image"], dict_id=dict_id)
    write_pgm(cfg["out"], recon,
              comment=f"config_sha256={digest} seed={cfg['seed']}")
    payload = report.to_json_dict()
    payload["config_sha256"] = digest
    payload["seed"] = cfg["seed"]
    report_path = cfg["report"] or cfg["out"] + ".json"
    with open(report_path, "w", encoding="utf-8") as f:
        json.dump(payload, f, indent=2, sort_keys=True)
        f.write("\n")
    shown = payload["psnr_db"]
    print(f"psnr_db={shown if isinstance(shown, str) else f'{shown:.2f}'} "
          f"-> {cfg['out']} (report: {report_path})")
    return 0


# ----------------------------------------------------------- eval-table1

def _parse_named(entries: list[str], what: str) -> list[tuple[str, str]]:
    pairs = []
    for entry in entries:
        name, eq, path = entry.partition("=")
        if not eq or not name or not path:
            raise UsageError(f"{what} {entry!r}: expected NAME=PATH")
        pairs.append((name.strip(), path.strip()))
    return pairs


def cmd_eval_table1(args) -> int:
    schema = {"images": (_strlist, []), "dict1": (str, None),
            "dict2": (str, None), "dict-large": (str, None),
            "k": (int, 5), "stride": (int, 1), "out": (str, None),
            "seed": (int, 0)}
    cfg = _merge_config(args, schema)
    if not cfg["images"] or not cfg["dict1"] or not cfg["dict2"] \
            or not cfg["dict-large"] or not cfg["out"]:
        raise UsageError("--images, --dict1, --dict2, --dict-large and "
                         "--out are all required")
    if cfg["k"] < 1 or cfg["stride"] < 1:
        raise UsageError("--k and --stride must be >= 1")
    digest = _digest("eval-table1", cfg)

    d1 = load_dictionary(cfg["dict1"])
    d2 = load_dictionary(cfg["dict2"])
    both = union(d1, d2)
    large = load_dictionary(cfg["dict-large"])
    columns = (("pd_1", d1), ("pd_2", d2), ("pd_union", both),
               ("pd_large", large))

    lines = [f"# config_sha256={digest}", f"# seed={cfg['seed']}",
             "image,pd_1,pd_2,pd_union,pd_large,improvement_db,status"]
    for name, path in _parse_named(cfg["images"], "image"):
        try:
            image = read_image(path)
        except OSError:
            lines.append(f"{name},,,,,,skipped")
            print(f"{name}: missing ({path}), skipped")
            continue
        scores = {}
        for column, dictionary in columns:
            _, report = reconstruct(image, dictionary, k=cfg["k"],
                                    stride=cfg["stride"], image_name=name,
                                    dict_id=column)
            scores[column] = report.psnr_db
            print(f"{name} {column}: {report.psnr_db:.2f} dB "
                  f"({report.seconds:.1f}s)")
        improvement = scores["pd_large"] - scores["pd_union"]
        cells = ",".join(f"{scores[c]:.2f}" for c, _ in columns)
        lines.append(f"{name},{cells},{improvement:.2f},ok")
    with open(cfg["out"], "w", encoding="utf-8") as f:
        f.write("\n".join(lines) + "\n")
    print(f"table -> {cfg['out']}")
    return 0


# ------------------------------------------------------------------ main

def _build_parser() -> _Parser:
    parser = _Parser(prog="patchsphere",
                     description="Pattern encoding on a sphere, spherical "
                                 "codes, bar dictionaries, OMP reconstruction.")
    sub = parser.add_subparsers(dest="subcommand", metavar="SUBCOMMAND")

    def add(name, func, help_text):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--config", help="key = value parameter file "
                                        "(flags override)")
        p.add_argument("--seed", type=int, help="master seed (default 0)")
        p.add_argument("--out", help="output path")
        p.set_defaults(func=func)
        return p

    p = add("encode", cmd_encode, "encode image patches as sphere points")
    p.add_argument("--image", help="PGM/PNG input")
    p.add_argument("--demo", choices=("eight", "rings"),
                   help="built-in fixture instead of an image")
    p.add_argument("--patch-size", type=int)
    p.add_argument("--stride", type=int)
    p.add_argument("--estimator", choices=("entropy", "ldc"))

    p = add("cluster", cmd_cluster, "sample and encode labeled regions")
    p.add_argument("--image", help="PGM/PNG input")
    p.add_argument("--patch-size", type=int)
    p.add_argument("--samples", type=int, help="patches per region")
    p.add_argument("--region", dest="regions", action="append",
                   metavar="LABEL:TOP,LEFT,H,W")
    p.add_argument("--estimator", choices=("entropy", "ldc"))

    p = add("gen-code", cmd_gen_code, "generate or load a spherical code")
    p.add_argument("--n", type=int, help="number of points")
    p.add_argument("--load", help="existing code file to normalize/report")
    p.add_argument("--iters", type=int, help="optimization sweep budget")

    p = add("gen-dict", cmd_gen_dict, "generate a bar-atom dictionary")
    p.add_argument("--code", help="spherical code file")
    p.add_argument("--atom-size", type=int)
    p.add_argument("--sheet", help="atom sheet PGM path")
    p.add_argument("--randomize", choices=("swap", "noise"))

    p = add("reconstruct", cmd_reconstruct, "OMP-reconstruct an image")
    p.add_argument("--image", help="PGM/PNG input")
    p.add_argument("--dict", dest="dicts", action="append", metavar="PATH",
                   help="dictionary file; repeat to union")
    p.add_argument("--k", type=int, help="sparsity level")
    p.add_argument("--stride", type=int)
    p.add_argument("--report", help="JSON report path")

    p = add("eval-table1", cmd_eval_table1, "PSNR table over four dictionaries")
    p.add_argument("--images", action="append", metavar="NAME=PATH")
    p.add_argument("--dict1", help="first constituent dictionary")
    p.add_argument("--dict2", help="second constituent dictionary")
    p.add_argument("--dict-large", help="large loaded-code dictionary")
    p.add_argument("--k", type=int)
    p.add_argument("--stride", type=int)
    return parser


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as stop:  # argparse --help exits 0, errors exit 1
        return int(stop.code or 0)
    if not getattr(args, "func", None):
        parser.print_usage(sys.stderr)
        return 1
    try:
        return args.func(args)
    except UsageError as err:
        print(f"usage error: {err}", file=sys.stderr)
        return 1
    except OSError as err:
        print(f"i/o error: {err}", file=sys.stderr)
        return 2
    except (ValueError, ArithmeticError, np.linalg.LinAlgError) as err:
        print(f"numeric contract violation: {err}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
