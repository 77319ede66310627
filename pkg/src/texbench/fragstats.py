"""Fragmentation statistics: predicted-mask counts grouped by GT segment count.

Produces the data behind box plots of "how many masks does the model emit per
image" as a function of how many regions the ground truth actually has; high
ratios flag over-segmentation of textured regions.
"""
from __future__ import annotations

import csv
import logging
from dataclasses import dataclass, field

import numpy as np

from .errors import TexbenchError
from .maskio import load_label_map, load_predictions

log = logging.getLogger(__name__)

QUARTILE_METHOD = "linear"  # numpy 'linear' interpolation == type-7 order statistics


@dataclass(frozen=True)
class GroupStats:
    n_gt_segments: int
    n_images: int
    min: float
    q1: float
    median: float
    q3: float
    max: float


@dataclass
class FragmentationSummary:
    """Per-image counts with per-group quartiles of predicted-mask counts."""

    groups: dict = field(default_factory=dict)     # n_gt -> list of n_pred, one per image
    ratios: list = field(default_factory=list)     # per image: n_pred / n_gt (0 when n_gt == 0)
    counts: list = field(default_factory=list)     # per image: (n_gt, n_pred)
    errors: list = field(default_factory=list)

    def group_stats(self) -> list[GroupStats]:
        stats = []
        for n_gt in sorted(self.groups):
            values = np.asarray(self.groups[n_gt], dtype=np.float64)
            q = np.percentile(values, [0, 25, 50, 75, 100], method=QUARTILE_METHOD)
            stats.append(GroupStats(n_gt, len(values), *(float(v) for v in q)))
        return stats

    @property
    def n_images(self) -> int:
        return len(self.counts)


def fragmentation(pairs) -> FragmentationSummary:
    """Tally (n_gt_regions, n_predicted_masks) for each (pred, gt) file pair.

    Unreadable pairs land in the summary's error list and are excluded from
    the groups.
    """
    summary = FragmentationSummary()
    for index, (pred_path, gt_path) in enumerate(pairs):
        try:
            preds = load_predictions(pred_path)
            gt = load_label_map(gt_path)
        except (TexbenchError, OSError) as exc:
            log.warning("fragmentation tally failed for %s: %s", pred_path, exc)
            summary.errors.append({
                "index": index, "pred": str(pred_path), "gt": str(gt_path), "error": str(exc),
            })
            continue
        n_gt = int(gt.region_ids().size)
        n_pred = len(preds)
        summary.groups.setdefault(n_gt, []).append(n_pred)
        summary.ratios.append(n_pred / n_gt if n_gt else 0.0)
        summary.counts.append((n_gt, n_pred))
    return summary


def write_frag_csv(path, summary: FragmentationSummary) -> None:
    """Write per-group quartiles; the quartile method is named in the header."""
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(f"# quartiles: {QUARTILE_METHOD} interpolation (type-7 order statistics)\n")
        writer = csv.writer(fh)
        writer.writerow(["group", "min", "q1", "median", "q3", "max", "n_images"])
        for gs in summary.group_stats():
            writer.writerow([gs.n_gt_segments, gs.min, gs.q1, gs.median, gs.q3, gs.max, gs.n_images])
