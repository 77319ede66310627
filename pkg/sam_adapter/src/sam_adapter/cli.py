"""The sam-adapter command line: infer / emit-config.

Exit codes: 0 success, 1 nothing produced, 2 configuration or usage errors.
"""
from __future__ import annotations

import argparse
import logging
import sys

from . import __version__
from .infer import AdapterConfigError, run_inference
from .profiles import PROFILES
from .train_config import emit_finetune_config


def _cmd_infer(args) -> int:
    written = run_inference(
        args.images,
        args.out,
        PROFILES[args.profile],
        checkpoint=args.checkpoint,
        stub=args.stub,
        stub_levels=args.stub_levels,
        stub_min_area=args.stub_min_area,
    )
    print(f"wrote {len(written)} prediction files", file=sys.stderr)
    return 0 if written else 1


def _cmd_emit_config(args) -> int:
    emit_finetune_config(args.manifest, args.out)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="sam-adapter",
        description="Automatic mask generation bridge: prediction export and "
                    "fine-tune config emission.",
    )
    parser.add_argument("--version", action="version", version=f"sam-adapter {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p_infer = sub.add_parser("infer", help="export prediction files for a directory of images")
    p_infer.add_argument("--images", required=True)
    p_infer.add_argument("--out", required=True)
    p_infer.add_argument("--profile", choices=sorted(PROFILES), required=True)
    backend = p_infer.add_mutually_exclusive_group(required=True)
    backend.add_argument("--checkpoint", default=None, help="model checkpoint path")
    backend.add_argument("--stub", action="store_true",
                         help="deterministic color-component generator (no weights needed)")
    p_infer.add_argument("--stub-levels", type=int, default=4, dest="stub_levels")
    p_infer.add_argument("--stub-min-area", type=int, default=1, dest="stub_min_area")
    p_infer.set_defaults(func=_cmd_infer)

    p_cfg = sub.add_parser("emit-config", help="write a fine-tune config for an augmented dataset")
    p_cfg.add_argument("--manifest", required=True, help="augmentation run manifest JSON")
    p_cfg.add_argument("--out", required=True, help="output YAML path")
    p_cfg.set_defaults(func=_cmd_emit_config)

    return parser


def main(argv=None) -> int:
    logging.basicConfig(stream=sys.stderr, level=logging.WARNING)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except (AdapterConfigError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


def entrypoint() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entrypoint()
