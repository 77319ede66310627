"""Writer for the texbench prediction-set wire format.

The format is the integration contract with the evaluation toolkit, so it is
implemented here directly rather than imported: JSON with ``extent`` [W, H],
optional ``generator_params``, and ``masks`` whose RLEs are ROW-MAJOR with a
leading zero-run count (not the column-major COCO layout).
"""
from __future__ import annotations

import json

import numpy as np


def rle_encode_rows(mask: np.ndarray) -> dict:
    """Row-major RLE starting with the (possibly zero) leading-zero count."""
    mask = np.asarray(mask, dtype=bool)
    flat = mask.ravel(order="C")
    boundaries = np.flatnonzero(np.diff(flat)) + 1
    runs = np.diff(np.concatenate(([0], boundaries, [flat.size])))
    if flat[0]:
        runs = np.concatenate(([0], runs))
    return {
        "size": [int(mask.shape[0]), int(mask.shape[1])],
        "runs": [int(r) for r in runs],
    }


def masks_to_prediction_json(
    masks, scores, stabilities, extent: tuple[int, int], params: dict
) -> dict:
    w, h = extent
    entries = []
    for mask, score, stability in zip(masks, scores, stabilities):
        if mask.shape != (h, w):
            raise ValueError(f"mask shape {mask.shape} does not match extent {(w, h)}")
        entry = {"rle": rle_encode_rows(mask), "score": float(score)}
        if stability is not None:
            entry["stability"] = float(stability)
        entries.append(entry)
    return {"extent": [int(w), int(h)], "generator_params": params, "masks": entries}


def write_prediction_file(path, doc: dict) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh)
        fh.write("\n")
