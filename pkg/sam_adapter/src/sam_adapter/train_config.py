"""Materialize fine-tune configuration files from an augmentation manifest.

Training itself runs upstream; this only writes the config file pointing the
trainer at the augmented dataset, with the epoch budget chosen by the
dataset's texture-blend ceiling: 19 epochs for mild blends (eta_max <= 0.3),
25 for the full-replacement regime.
"""
from __future__ import annotations

import json
from pathlib import Path

import yaml

from .infer import AdapterConfigError

MILD_ETA_CEILING = 0.3
EPOCHS_MILD = 19
EPOCHS_FULL = 25
BASE_MODEL = "sam2_hiera_small"


def epochs_for(eta_max: float) -> int:
    return EPOCHS_MILD if eta_max <= MILD_ETA_CEILING else EPOCHS_FULL


def emit_finetune_config(manifest_path, out_path) -> dict:
    """Build and write the trainer config; returns the config dict."""
    manifest_path = Path(manifest_path)
    if not manifest_path.exists():
        raise AdapterConfigError(f"augmentation manifest not found: {manifest_path}")
    with open(manifest_path, encoding="utf-8") as fh:
        try:
            manifest = json.load(fh)
        except json.JSONDecodeError as exc:
            raise AdapterConfigError(f"manifest is not valid JSON: {exc}") from exc
    for key in ("config", "images"):
        if key not in manifest:
            raise AdapterConfigError(f"manifest is missing the {key!r} field")
    eta_max = float(manifest["config"]["eta_max"])
    config = {
        "model": BASE_MODEL,
        "finetune": {
            "base": "upstream-defaults",
            "epochs": epochs_for(eta_max),
        },
        "dataset": {
            "source_manifest": str(manifest_path),
            "eta_max": eta_max,
            "entries": [
                {"image": record["output_image"], "labels": record["output_labels"]}
                for record in manifest["images"]
            ],
        },
    }
    with open(out_path, "w", encoding="utf-8") as fh:
        yaml.safe_dump(config, fh, sort_keys=False)
    return config
