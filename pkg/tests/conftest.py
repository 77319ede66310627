import json
import os
import sys

import numpy as np
import pytest

sys.path.insert(0, os.path.dirname(__file__))  # make oracles importable

from texbench import InstanceLabelMap, PredictionMask, PredictionSet, rle_encode
from texbench import imgio


def make_prediction_set(masks, scores=None, generator_params=None) -> PredictionSet:
    masks = [np.asarray(m, dtype=bool) for m in masks]
    if scores is None:
        scores = [0.9] * len(masks)
    h, w = masks[0].shape if masks else (4, 4)
    return PredictionSet(
        extent=(w, h),
        masks=[PredictionMask(rle_encode(m), float(s)) for m, s in zip(masks, scores)],
        generator_params=generator_params,
    )


@pytest.fixture
def frag_fixture():
    """4x4 canvas, two half-regions; left predicted whole, right in two parts."""
    labels = np.zeros((4, 4), dtype=np.uint16)
    labels[:, :2] = 1
    labels[:, 2:] = 2
    left = np.zeros((4, 4), dtype=bool)
    left[:, :2] = True
    top_right = np.zeros((4, 4), dtype=bool)
    top_right[:2, 2:] = True
    bottom_right = np.zeros((4, 4), dtype=bool)
    bottom_right[2:, 2:] = True
    preds = make_prediction_set([left, top_right, bottom_right], [0.9, 0.8, 0.7])
    return preds, InstanceLabelMap(labels)


def random_label_map(rng, max_side=16, max_regions=5) -> InstanceLabelMap:
    h = int(rng.integers(2, max_side + 1))
    w = int(rng.integers(2, max_side + 1))
    n_regions = int(rng.integers(1, max_regions + 1))
    labels = rng.integers(0, n_regions + 1, size=(h, w))
    if not (labels > 0).any():
        labels[0, 0] = 1
    return InstanceLabelMap(labels.astype(np.uint16))


def random_predictions(rng, label_map, max_masks=8) -> PredictionSet:
    w, h = label_map.extent
    n = int(rng.integers(0, max_masks + 1))
    masks = [rng.random((h, w)) < rng.uniform(0.1, 0.9) for _ in range(n)]
    # Coarse scores make equal-score ties common, exercising order tie-breaks.
    scores = np.round(rng.random(n), 1)
    return PredictionSet(
        extent=(w, h),
        masks=[PredictionMask(rle_encode(m), float(s)) for m, s in zip(masks, scores)],
    )


def write_texture_bank(root, categories=("stripes", "dots", "checker"), per_category=2):
    """Synthesize a small on-disk texture bank; returns its directory."""
    bank_dir = os.path.join(str(root), "textures")
    for ci, cat in enumerate(categories):
        d = os.path.join(bank_dir, cat)
        os.makedirs(d, exist_ok=True)
        for t in range(per_category):
            img = np.zeros((24, 24, 3), dtype=np.uint8)
            if ci % 3 == 0:
                img[::2] = (200, 60 + 40 * t, 30)
            elif ci % 3 == 1:
                img[::3, ::3] = (20, 200, 60 + 40 * t)
            else:
                img[:, :] = 40
                img[::2, ::2] = 220 - 30 * t
            imgio.write_rgb(os.path.join(d, f"tex{t}.png"), img)
    return bank_dir


def write_toy_dataset(root, n_images=2, size=(40, 56), n_instances=2, seed=0):
    """Write images + label maps + a manifest; returns the manifest path."""
    rng = np.random.default_rng(seed)
    data_dir = os.path.join(str(root), "data")
    os.makedirs(data_dir, exist_ok=True)
    h, w = size
    entries = []
    for i in range(n_images):
        base = np.zeros((h, w, 3), dtype=np.uint8)
        base[:] = rng.integers(30, 220, size=3)
        base[:: 2 + i] = rng.integers(30, 220, size=3)
        labels = np.zeros((h, w), dtype=np.uint16)
        if n_instances >= 1:
            labels[2 : h // 2, 2 : w // 2] = 1
        if n_instances >= 2:
            labels[h // 2 + 2 : h - 2, w // 2 + 2 : w - 2] = 2
        if n_instances >= 3:
            labels[2 : h // 3, w // 2 + 2 : w - 2] = 3
        imgio.write_rgb(os.path.join(data_dir, f"img{i}.png"), base)
        imgio.write_label_png(os.path.join(data_dir, f"lab{i}.png"), labels)
        entries.append({"image": f"img{i}.png", "labels": f"lab{i}.png"})
    manifest = os.path.join(data_dir, "manifest.json")
    with open(manifest, "w", encoding="utf-8") as fh:
        json.dump(entries, fh)
    return manifest
