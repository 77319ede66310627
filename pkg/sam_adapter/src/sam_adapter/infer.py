"""Batch inference: images in, prediction-set JSON files out."""
from __future__ import annotations

import logging
import os
from pathlib import Path

import cv2

from .predictions import masks_to_prediction_json, write_prediction_file
from .profiles import GeneratorProfile, generator_params
from .stub import StubMaskGenerator

log = logging.getLogger(__name__)

IMAGE_EXTENSIONS = (".png", ".jpg", ".jpeg", ".bmp", ".tif", ".tiff", ".webp")


class AdapterConfigError(ValueError):
    """Bad adapter configuration (missing backend, bad paths)."""


def _load_real_generator(checkpoint: str, profile: GeneratorProfile):
    try:
        import torch
        from sam2.automatic_mask_generator import SAM2AutomaticMaskGenerator
        from sam2.build_sam import build_sam2
    except ImportError as exc:
        raise AdapterConfigError(
            "the sam2 package is not installed; install it or pass --stub"
        ) from exc
    if not os.path.exists(checkpoint):
        raise AdapterConfigError(f"checkpoint not found: {checkpoint}")
    device = "cuda" if torch.cuda.is_available() else "cpu"
    model = build_sam2(checkpoint_path=checkpoint, device=device)
    generator = SAM2AutomaticMaskGenerator(
        model,
        points_per_side=profile.points_per_side,
        stability_score_thresh=profile.stability_score_thresh,
    )

    def run(image):
        records = generator.generate(image)
        return [
            (r["segmentation"], r["predicted_iou"], r.get("stability_score"))
            for r in records
        ]

    return run


def run_inference(
    images_dir,
    out_dir,
    profile: GeneratorProfile,
    checkpoint: str | None = None,
    stub: bool = False,
    stub_levels: int = 4,
    stub_min_area: int = 1,
) -> list[str]:
    """Generate one prediction file per image in ``images_dir``.

    With ``stub=True`` uses the deterministic color-component generator; the
    exported generator_params still carry the requested profile so evaluation
    configs stay comparable. Per-image failures are logged and skipped.
    """
    images_dir = Path(images_dir)
    if not images_dir.is_dir():
        raise AdapterConfigError(f"images directory not found: {images_dir}")
    if stub:
        generator = StubMaskGenerator(levels_per_channel=stub_levels, min_area=stub_min_area)
        run = generator.generate
        backend = "stub"
    else:
        if checkpoint is None:
            raise AdapterConfigError("either --checkpoint or --stub is required")
        run = _load_real_generator(checkpoint, profile)
        backend = "sam2"
    params = generator_params(profile, backend)

    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    written = []
    images = sorted(
        p for p in images_dir.iterdir()
        if p.suffix.lower() in IMAGE_EXTENSIONS and p.is_file()
    )
    for path in images:
        try:
            bgr = cv2.imread(str(path), cv2.IMREAD_COLOR)
            if bgr is None:
                raise ValueError(f"not a readable image: {path}")
            image = cv2.cvtColor(bgr, cv2.COLOR_BGR2RGB)
            results = run(image)
            h, w = image.shape[:2]
            doc = masks_to_prediction_json(
                [m for m, _, _ in results],
                [s for _, s, _ in results],
                [t for _, _, t in results],
                extent=(w, h),
                params=params,
            )
            out_path = out_dir / f"{path.stem}.json"
            write_prediction_file(out_path, doc)
            written.append(str(out_path))
        except (ValueError, OSError) as exc:
            log.warning("inference failed for %s: %s", path, exc)
    return written
