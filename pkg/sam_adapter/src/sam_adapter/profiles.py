"""Inference working points for the automatic mask generator."""
from __future__ import annotations

from dataclasses import dataclass


@dataclass(frozen=True)
class GeneratorProfile:
    """A named automatic-mask-generator working point."""

    name: str
    points_per_side: int
    stability_score_thresh: float


PROFILES = {
    "default": GeneratorProfile("default", points_per_side=32, stability_score_thresh=0.95),
    "modified": GeneratorProfile("modified", points_per_side=64, stability_score_thresh=0.2),
}

# All other generator knobs stay at their upstream defaults; recording them in
# every exported file keeps runs reproducible even if upstream defaults drift.
UPSTREAM_DEFAULTS = {
    "points_per_batch": 64,
    "pred_iou_thresh": 0.8,
    "stability_score_offset": 1.0,
    "mask_threshold": 0.0,
    "box_nms_thresh": 0.7,
    "crop_n_layers": 0,
    "crop_nms_thresh": 0.7,
    "crop_overlap_ratio": 512 / 1500,
    "crop_n_points_downscale_factor": 1,
    "min_mask_region_area": 0,
    "use_m2m": False,
    "multimask_output": True,
}


def generator_params(profile: GeneratorProfile, backend: str) -> dict:
    """The full parameter record embedded in exported prediction files."""
    params = {
        "backend": backend,
        "profile": profile.name,
        "points_per_side": profile.points_per_side,
        "stability_score_thresh": profile.stability_score_thresh,
    }
    params.update(UPSTREAM_DEFAULTS)
    return params
