"""Bit-exact I/O for label maps and possibly-overlapping prediction sets.

On-disk formats
---------------
Ground truth: single-channel 16-bit PNG; pixel value 0 is background /
unlabeled, values >= 1 are region ids (ids need not be contiguous).

Predictions: JSON of the form::

    {"extent": [W, H],
     "generator_params": {...},              # optional
     "masks": [{"rle": {"size": [H, W], "runs": [...]},
                "score": s, "stability": t}, ...]}

The run-length encoding is ROW-MAJOR over the flattened mask and starts with
the count of leading zeros (possibly 0), alternating zero-runs and one-runs.
This differs from the column-major COCO convention; converting COCO RLEs by
relabeling ``counts`` as ``runs`` silently transposes every mask.
"""
from __future__ import annotations

import json
import os
from dataclasses import dataclass, field

import numpy as np

from . import imgio
from .errors import CorruptFormatError, InvalidInputError
from .validation import as_binary_mask, as_label_array


@dataclass(frozen=True)
class RunLength:
    """Canonical row-major run-length encoding of one binary mask."""

    size: tuple[int, int]  # (height, width)
    runs: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "size", tuple(int(v) for v in self.size))
        object.__setattr__(self, "runs", tuple(int(r) for r in self.runs))
        h, w = self.size
        if h < 1 or w < 1:
            raise InvalidInputError(f"mask size must be positive, got {self.size}")
        if not self.runs:
            raise CorruptFormatError("runs must be non-empty")
        if any(r < 0 for r in self.runs):
            raise CorruptFormatError("runs must be non-negative")
        if any(r == 0 for r in self.runs[1:]):
            raise CorruptFormatError("only the leading zero-run may have length 0")
        if sum(self.runs) != h * w:
            raise CorruptFormatError(
                f"runs sum to {sum(self.runs)}, expected {h}*{w}={h * w}"
            )

    def to_json(self) -> dict:
        return {"size": [self.size[0], self.size[1]], "runs": list(self.runs)}


def rle_encode(mask) -> RunLength:
    """Encode a binary mask; starts with the (possibly zero) leading-zero run."""
    arr = as_binary_mask(mask)
    if arr.size == 0:
        raise InvalidInputError("mask is empty")
    flat = arr.ravel(order="C")
    boundaries = np.flatnonzero(np.diff(flat)) + 1
    runs = np.diff(np.concatenate(([0], boundaries, [flat.size])))
    if flat[0]:
        runs = np.concatenate(([0], runs))
    return RunLength(size=(arr.shape[0], arr.shape[1]), runs=tuple(int(r) for r in runs))


def rle_decode(rle: RunLength) -> np.ndarray:
    """Exact inverse of :func:`rle_encode`; returns a bool (H, W) array."""
    h, w = rle.size
    runs = np.asarray(rle.runs, dtype=np.int64)
    if runs.sum() != h * w:
        raise CorruptFormatError(f"runs sum to {int(runs.sum())}, expected {h * w}")
    values = np.arange(len(runs)) % 2 == 1
    return np.repeat(values, runs).reshape(h, w)


@dataclass
class PredictionMask:
    """One predicted mask with its generator confidence."""

    rle: RunLength
    score: float
    stability: float | None = None
    extra: dict = field(default_factory=dict)


@dataclass
class PredictionSet:
    """Ordered, possibly-overlapping predicted masks for one image.

    Mask order is the generator's emission order; evaluation tie-breaks
    depend on it.
    """

    extent: tuple[int, int]  # (width, height)
    masks: list[PredictionMask]
    generator_params: dict | None = None
    extra: dict = field(default_factory=dict)

    def __post_init__(self):
        w, h = self.extent
        if w < 1 or h < 1:
            raise InvalidInputError(f"extent must be positive, got {self.extent}")
        for i, m in enumerate(self.masks):
            if m.rle.size != (h, w):
                raise CorruptFormatError(
                    f"mask {i} has size {m.rle.size}, expected {(h, w)} from extent"
                )
            if not (0.0 <= m.score <= 1.0):
                raise CorruptFormatError(f"mask {i} score {m.score} outside [0, 1]")
            if m.stability is not None and not (0.0 <= m.stability <= 1.0):
                raise CorruptFormatError(f"mask {i} stability {m.stability} outside [0, 1]")

    def __len__(self) -> int:
        return len(self.masks)

    def decode_mask(self, i: int) -> np.ndarray:
        return rle_decode(self.masks[i].rle)


@dataclass(frozen=True)
class InstanceLabelMap:
    """Per-pixel ground-truth region ids; 0 is background."""

    labels: np.ndarray

    def __post_init__(self):
        arr = as_label_array(self.labels)
        arr = np.array(arr, copy=True)
        arr.setflags(write=False)
        object.__setattr__(self, "labels", arr)

    @property
    def extent(self) -> tuple[int, int]:
        return (self.labels.shape[1], self.labels.shape[0])

    def region_ids(self, include_background: bool = False) -> np.ndarray:
        ids = np.unique(self.labels)
        if not include_background:
            ids = ids[ids != 0]
        return ids

    def region_mask(self, region_id: int) -> np.ndarray:
        return self.labels == region_id


def load_label_map(path) -> InstanceLabelMap:
    return InstanceLabelMap(imgio.read_label_png(path))


def save_label_map(path, label_map: InstanceLabelMap) -> None:
    imgio.write_label_png(path, label_map.labels)


_PRED_KEYS = {"extent", "generator_params", "masks"}
_MASK_KEYS = {"rle", "score", "stability"}


def load_predictions(path) -> PredictionSet:
    path = os.fspath(path)
    if not os.path.exists(path):
        raise FileNotFoundError(path)
    with open(path, encoding="utf-8") as fh:
        try:
            raw = json.load(fh)
        except json.JSONDecodeError as exc:
            raise CorruptFormatError(f"not valid JSON: {path}: {exc}") from exc
    try:
        return _predictions_from_json(raw)
    except (CorruptFormatError, InvalidInputError) as exc:
        raise CorruptFormatError(f"{path}: {exc}") from exc


def _predictions_from_json(raw: dict) -> PredictionSet:
    if not isinstance(raw, dict):
        raise CorruptFormatError("top level must be a JSON object")
    try:
        extent = raw["extent"]
        mask_entries = raw["masks"]
    except KeyError as exc:
        raise CorruptFormatError(f"missing required field {exc}") from exc
    if not (isinstance(extent, list) and len(extent) == 2):
        raise CorruptFormatError(f"extent must be [W, H], got {extent!r}")
    if not isinstance(mask_entries, list):
        raise CorruptFormatError("masks must be a list")
    masks = []
    for i, entry in enumerate(mask_entries):
        if not isinstance(entry, dict) or "rle" not in entry or "score" not in entry:
            raise CorruptFormatError(f"mask {i} must be an object with rle and score")
        rle_raw = entry["rle"]
        if (
            not isinstance(rle_raw, dict)
            or not isinstance(rle_raw.get("size"), list)
            or len(rle_raw["size"]) != 2
            or not isinstance(rle_raw.get("runs"), list)
        ):
            raise CorruptFormatError(f"mask {i} rle must have size [H, W] and runs")
        if not all(isinstance(r, int) for r in rle_raw["runs"]):
            raise CorruptFormatError(f"mask {i} runs must be integers")
        rle = RunLength(size=tuple(int(v) for v in rle_raw["size"]), runs=tuple(rle_raw["runs"]))
        masks.append(
            PredictionMask(
                rle=rle,
                score=float(entry["score"]),
                stability=None if entry.get("stability") is None else float(entry["stability"]),
                extra={k: v for k, v in entry.items() if k not in _MASK_KEYS},
            )
        )
    return PredictionSet(
        extent=(int(extent[0]), int(extent[1])),
        masks=masks,
        generator_params=raw.get("generator_params"),
        extra={k: v for k, v in raw.items() if k not in _PRED_KEYS},
    )


def save_predictions(path, preds: PredictionSet) -> None:
    doc: dict = {"extent": [preds.extent[0], preds.extent[1]]}
    if preds.generator_params is not None:
        doc["generator_params"] = preds.generator_params
    doc["masks"] = []
    for m in preds.masks:
        entry: dict = {"rle": m.rle.to_json(), "score": m.score}
        if m.stability is not None:
            entry["stability"] = m.stability
        entry.update(m.extra)
        doc["masks"].append(entry)
    doc.update(preds.extra)
    with open(os.fspath(path), "w", encoding="utf-8") as fh:
        json.dump(doc, fh)
        fh.write("\n")
