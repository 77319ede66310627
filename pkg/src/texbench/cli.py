"""The texbench command line: augment / eval / frag / codec-roundtrip.

Exit codes: 0 full success, 1 partial per-item failures, 2 configuration or
usage errors. Diagnostics go to stderr; machine-readable output goes to files
or stdout only. Each file-writing subcommand drops an atomically-written
run_manifest.json next to its outputs.
"""
from __future__ import annotations

import argparse
import datetime
import hashlib
import json
import logging
import os
import sys
import tempfile
from dataclasses import asdict
from pathlib import Path

from . import __version__
from .augment import AugmentationConfig, TextureBank, build_dataset
from .codec import roundtrip_stats
from .errors import ConfigurationError, TexbenchError
from .fragstats import fragmentation, write_frag_csv
from .metrics import EvalConfig, evaluate_dataset, write_report
from . import imgio

log = logging.getLogger("texbench")

_LOG_LEVELS = {"error": logging.ERROR, "warn": logging.WARNING,
               "info": logging.INFO, "debug": logging.DEBUG}


def _setup_logging() -> None:
    level_name = os.environ.get("TEXBENCH_LOG", "warn").lower()
    if level_name not in _LOG_LEVELS:
        raise ConfigurationError(
            f"TEXBENCH_LOG must be one of {sorted(_LOG_LEVELS)}, got {level_name!r}"
        )
    logging.basicConfig(
        stream=sys.stderr,
        level=_LOG_LEVELS[level_name],
        format="%(levelname)s %(name)s: %(message)s",
    )


def _sha256(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


def _utcnow() -> str:
    return datetime.datetime.now(datetime.timezone.utc).isoformat()


def write_run_manifest(path, payload: dict) -> None:
    """Atomic write: the manifest appears complete or not at all."""
    path = Path(path)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=".run_manifest_", suffix=".json")
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as fh:
            json.dump(payload, fh, indent=2)
            fh.write("\n")
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _load_pairs(pairs_path, preds_dir, gt_dir) -> list[tuple[str, str]]:
    pairs_path = Path(pairs_path)
    if not pairs_path.exists():
        raise ConfigurationError(f"pairs file not found: {pairs_path}")
    with open(pairs_path, encoding="utf-8") as fh:
        try:
            entries = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ConfigurationError(f"pairs file is not valid JSON: {exc}") from exc
    if not isinstance(entries, list):
        raise ConfigurationError("pairs file must be a JSON array")
    pairs = []
    for i, entry in enumerate(entries):
        if not isinstance(entry, dict) or "pred" not in entry or "gt" not in entry:
            raise ConfigurationError(f"pairs entry {i} must have 'pred' and 'gt'")
        pred = entry["pred"] if os.path.isabs(entry["pred"]) else os.path.join(preds_dir, entry["pred"])
        gt = entry["gt"] if os.path.isabs(entry["gt"]) else os.path.join(gt_dir, entry["gt"])
        pairs.append((pred, gt))
    return pairs


def _cmd_augment(args) -> int:
    started = _utcnow()
    cfg = AugmentationConfig(
        eta_max=args.eta_max,
        eta_mode=args.eta_mode,
        patch_size=args.patch_size,
        grid_k=args.grid_k,
        master_seed=args.seed,
    )
    bank = TextureBank.from_dir(args.textures)
    manifest = build_dataset(args.manifest, bank, cfg, args.out, workers=args.workers)
    manifest.update({
        "subcommand": "augment",
        "started_at": started,
        "finished_at": _utcnow(),
        "input_hashes": {"manifest": _sha256(args.manifest)},
    })
    write_run_manifest(Path(args.out) / "run_manifest.json", manifest)
    n_err = len(manifest["errors"])
    if n_err:
        log.error("%d of %d images failed", n_err, n_err + len(manifest["images"]))
    return 1 if n_err else 0


def _cmd_eval(args) -> int:
    started = _utcnow()
    cfg = EvalConfig(
        aggregate=args.aggregate,
        include_background_miou=args.include_background_miou,
        include_background_ari=not args.exclude_background_ari,
        min_overlap_frac=args.min_overlap_frac,
    )
    pairs = _load_pairs(args.pairs, args.preds, args.gt)
    report = evaluate_dataset(pairs, cfg, workers=args.workers)
    write_report(report, args.report)
    manifest = {
        "tool_version": __version__,
        "subcommand": "eval",
        "config": asdict(cfg),
        "started_at": started,
        "finished_at": _utcnow(),
        "input_hashes": {"pairs": _sha256(args.pairs)},
        "report": str(args.report),
        "errors": report.errors,
    }
    write_run_manifest(Path(args.report).parent / "run_manifest.json", manifest)
    if report.errors:
        log.error("%d of %d pairs failed", len(report.errors), len(pairs))
    return 1 if report.errors else 0


def _cmd_frag(args) -> int:
    started = _utcnow()
    pairs = _load_pairs(args.pairs, args.preds, args.gt)
    summary = fragmentation(pairs)
    write_frag_csv(args.out, summary)
    manifest = {
        "tool_version": __version__,
        "subcommand": "frag",
        "config": {"pairs": str(args.pairs)},
        "started_at": started,
        "finished_at": _utcnow(),
        "input_hashes": {"pairs": _sha256(args.pairs)},
        "out": str(args.out),
        "errors": summary.errors,
    }
    write_run_manifest(Path(args.out).parent / "run_manifest.json", manifest)
    return 1 if summary.errors else 0


def _cmd_codec_roundtrip(args) -> int:
    image = imgio.read_rgb(args.image)
    stats = roundtrip_stats(image, patch_size=args.patch_size, grid_k=args.grid_k)
    if args.out:
        from .codec import decode, encode_image

        comp = encode_image(
            image.astype("float64") / 255.0, patch_size=args.patch_size, grid_k=args.grid_k
        )
        imgio.write_rgb(args.out, decode(comp, noise_seed=args.seed))
        stats["reconstruction"] = str(args.out)
    json.dump(stats, sys.stdout, indent=2)
    sys.stdout.write("\n")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="texbench",
        description="Texture-transfer augmentation and texture-aware segmentation evaluation.",
    )
    parser.add_argument("--version", action="version", version=f"texbench {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p_aug = sub.add_parser("augment", help="build a texture-augmented dataset")
    p_aug.add_argument("--manifest", required=True, help="JSON array of {image, labels} paths")
    p_aug.add_argument("--textures", required=True, help="texture bank directory")
    p_aug.add_argument("--out", required=True, help="output directory")
    p_aug.add_argument("--eta-max", type=float, default=0.3, dest="eta_max")
    p_aug.add_argument("--eta-mode", choices=["uniform", "fixed"], default="uniform",
                       dest="eta_mode")
    p_aug.add_argument("--patch-size", type=int, default=16, dest="patch_size")
    p_aug.add_argument("--grid-k", type=int, default=4, dest="grid_k")
    p_aug.add_argument("--seed", type=int, default=0)
    p_aug.add_argument("--workers", type=int, default=1)
    p_aug.set_defaults(func=_cmd_augment)

    p_eval = sub.add_parser("eval", help="evaluate prediction files against label maps")
    p_eval.add_argument("--preds", required=True, help="base directory for prediction paths")
    p_eval.add_argument("--gt", required=True, help="base directory for label map paths")
    p_eval.add_argument("--pairs", required=True, help="JSON array of {pred, gt} paths")
    p_eval.add_argument("--report", required=True, help="output report JSON (CSV written beside)")
    p_eval.add_argument("--aggregate", choices=["both", "agg", "nonagg"], default="both")
    p_eval.add_argument("--min-overlap-frac", type=float, default=0.0, dest="min_overlap_frac")
    p_eval.add_argument("--include-background-miou", action="store_true",
                        dest="include_background_miou")
    p_eval.add_argument("--exclude-background-ari", action="store_true",
                        dest="exclude_background_ari")
    p_eval.add_argument("--workers", type=int, default=1)
    p_eval.set_defaults(func=_cmd_eval)

    p_frag = sub.add_parser("frag", help="fragmentation statistics CSV")
    p_frag.add_argument("--preds", required=True)
    p_frag.add_argument("--gt", required=True)
    p_frag.add_argument("--pairs", required=True)
    p_frag.add_argument("--out", required=True, help="output CSV path")
    p_frag.set_defaults(func=_cmd_frag)

    p_rt = sub.add_parser("codec-roundtrip", help="encode/decode an image; error stats as JSON")
    p_rt.add_argument("image", help="input image path")
    p_rt.add_argument("--patch-size", type=int, default=16, dest="patch_size")
    p_rt.add_argument("--grid-k", type=int, default=4, dest="grid_k")
    p_rt.add_argument("--seed", type=int, default=0)
    p_rt.add_argument("--out", default=None, help="also write the reconstruction PNG here")
    p_rt.set_defaults(func=_cmd_codec_roundtrip)

    return parser


def main(argv=None) -> int:
    try:
        _setup_logging()
    except ConfigurationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # argparse handles --help/usage errors
        return int(exc.code or 0)
    try:
        return args.func(args)
    except (ConfigurationError, TexbenchError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except FileNotFoundError as exc:
        print(f"error: file not found: {exc}", file=sys.stderr)
        return 2


def entrypoint() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entrypoint()
