"""Texture-aware segmentation metrics.

Predicted masks are first assigned to ground-truth regions by pixel
plurality. Mean IoU is then reported two ways: aggregated (the union of a
region's assigned masks is scored against the region, measuring coverage
regardless of fragmentation) and non-aggregated (each assigned mask is scored
individually and averaged, which penalizes over-segmentation). The adjusted
Rand index scores the full pixel partition obtained by flattening the
prediction set by score priority.
"""
from __future__ import annotations

import csv
import json
import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np

from .errors import InvalidInputError, TexbenchError, UndefinedMetricError
from .maskio import InstanceLabelMap, PredictionSet, load_label_map, load_predictions
from .validation import as_binary_mask, check_same_extent, check_unit_interval

log = logging.getLogger(__name__)


def iou(a, b) -> float:
    """Intersection over union of two binary masks; 0 when both are empty."""
    a = as_binary_mask(a, "a")
    b = as_binary_mask(b, "b")
    check_same_extent(a.shape, b.shape, "masks")
    union = np.logical_or(a, b).sum()
    if union == 0:
        return 0.0
    return float(np.logical_and(a, b).sum() / union)


@dataclass(frozen=True)
class AssignmentTable:
    """Plurality assignment of predicted masks to ground-truth regions."""

    pred_to_gt: tuple    # per predicted mask: assigned region id or None
    gt_to_preds: dict    # region id -> tuple of predicted mask indices

    def assigned(self, region_id: int) -> tuple:
        return self.gt_to_preds.get(int(region_id), ())


def assign(
    preds: PredictionSet,
    gt: InstanceLabelMap,
    include_background: bool = False,
    min_overlap_frac: float = 0.0,
) -> AssignmentTable:
    """Assign each predicted mask to the region holding the plurality of its pixels.

    Ties break toward the smaller region id; masks with zero overlap stay
    unassigned. With ``include_background=False`` (default) region id 0 is
    unassignable and its pixels count as outside every region.
    ``min_overlap_frac`` additionally requires the winning overlap to cover
    at least that fraction of the mask's own area.
    """
    check_unit_interval(min_overlap_frac, "min_overlap_frac")
    labels = gt.labels
    n_bins = int(labels.max()) + 1
    region_ids = gt.region_ids(include_background)
    pred_to_gt = []
    gt_to_preds: dict[int, list[int]] = {int(r): [] for r in region_ids}
    for i in range(len(preds)):
        mask = preds.decode_mask(i)
        check_same_extent(mask.shape, labels.shape, "prediction and label map")
        counts = np.bincount(labels[mask], minlength=n_bins)
        if not include_background:
            counts[0] = 0
        best = int(counts.argmax())  # first maximum: smaller id wins ties
        best_count = int(counts[best])
        area = int(mask.sum())
        if best_count > 0 and best_count >= min_overlap_frac * area:
            pred_to_gt.append(best)
            gt_to_preds[best].append(i)
        else:
            pred_to_gt.append(None)
    return AssignmentTable(
        pred_to_gt=tuple(pred_to_gt),
        gt_to_preds={r: tuple(v) for r, v in gt_to_preds.items()},
    )


def miou(
    preds: PredictionSet,
    gt: InstanceLabelMap,
    aggregate: bool = True,
    include_background: bool = False,
    min_overlap_frac: float = 0.0,
) -> float:
    """Mean IoU over ground-truth regions.

    Aggregated: each region is scored against the union of its assigned
    masks. Non-aggregated: each region's score is the mean IoU of its
    assigned masks taken individually, so fragmented predictions are
    penalized. Regions with no assigned mask score 0 either way.
    """
    region_ids = gt.region_ids(include_background)
    if region_ids.size == 0:
        raise UndefinedMetricError("label map has no regions to score")
    table = assign(preds, gt, include_background, min_overlap_frac)
    scores = []
    for rid in region_ids:
        region = gt.region_mask(rid)
        assigned = table.assigned(rid)
        if not assigned:
            scores.append(0.0)
        elif aggregate:
            union = np.zeros_like(region)
            for i in assigned:
                union |= preds.decode_mask(i)
            scores.append(iou(union, region))
        else:
            scores.append(float(np.mean([iou(preds.decode_mask(i), region) for i in assigned])))
    return float(np.mean(scores))


def flatten_predictions(preds: PredictionSet) -> np.ndarray:
    """Flatten overlapping masks to one per-pixel labeling.

    Each pixel takes 1 + the index of the highest-score covering mask, ties
    won by the earlier mask in emission order; uncovered pixels get 0.
    """
    w, h = preds.extent
    out = np.zeros((h, w), dtype=np.int64)
    # Painter's algorithm: lowest priority first, so the winner paints last.
    order = sorted(range(len(preds)), key=lambda i: (preds.masks[i].score, -i))
    for i in order:
        out[preds.decode_mask(i)] = i + 1
    return out


def ari(preds: PredictionSet, gt: InstanceLabelMap, include_background: bool = True) -> float:
    """Adjusted Rand index between the GT partition and flattened predictions.

    Computed from the contingency table with exact integer pair counts.
    Returns 1.0 in the degenerate case where both partitions are trivial
    (identical single-cluster or all-singleton partitions).
    """
    flat = flatten_predictions(preds)
    check_same_extent(flat.shape, gt.labels.shape, "predictions and label map")
    g = gt.labels.ravel()
    p = flat.ravel()
    if not include_background:
        keep = g != 0
        g, p = g[keep], p[keep]
        if g.size == 0:
            raise UndefinedMetricError("no labeled pixels to score")
    return _ari_from_labelings(g, p)


def _ari_from_labelings(g: np.ndarray, p: np.ndarray) -> float:
    _, g_inv = np.unique(g, return_inverse=True)
    _, p_inv = np.unique(p, return_inverse=True)
    n_g = int(g_inv.max()) + 1
    n_p = int(p_inv.max()) + 1
    table = np.bincount(g_inv * n_p + p_inv, minlength=n_g * n_p).reshape(n_g, n_p)

    def comb2(x: np.ndarray) -> int:
        x = x.astype(object)  # python ints: exact pair counts at any size
        return int((x * (x - 1) // 2).sum())

    index = comb2(table)
    sum_a = comb2(table.sum(axis=1))
    sum_b = comb2(table.sum(axis=0))
    n = g.size
    total_pairs = n * (n - 1) // 2
    numerator = 2 * (index * total_pairs - sum_a * sum_b)
    denominator = (sum_a + sum_b) * total_pairs - 2 * sum_a * sum_b
    if denominator == 0:
        # Both partitions trivial in the same way; they are identical.
        return 1.0
    return numerator / denominator


@dataclass
class EvalConfig:
    """Evaluation protocol knobs, echoed verbatim into reports."""

    aggregate: str = "both"  # which mIoU variants to compute: both|agg|nonagg
    include_background_miou: bool = False
    include_background_ari: bool = True
    min_overlap_frac: float = 0.0

    def __post_init__(self):
        if self.aggregate not in ("both", "agg", "nonagg"):
            raise InvalidInputError(f"aggregate must be both|agg|nonagg, got {self.aggregate}")
        check_unit_interval(self.min_overlap_frac, "min_overlap_frac")


@dataclass
class ImageMetrics:
    pred_path: str
    gt_path: str
    miou_agg: float | None
    miou_nonagg: float | None
    ari: float
    n_pred_masks: int
    n_gt_regions: int


@dataclass
class MetricsReport:
    """Per-image metrics plus unweighted dataset means and the config echo."""

    config: EvalConfig
    images: list[ImageMetrics] = field(default_factory=list)
    errors: list[dict] = field(default_factory=list)

    def means(self) -> dict:
        out = {}
        for name in ("miou_agg", "miou_nonagg", "ari", "n_pred_masks", "n_gt_regions"):
            values = [getattr(im, name) for im in self.images if getattr(im, name) is not None]
            out[name] = float(np.mean(values)) if values else None
        return out

    def to_json(self) -> dict:
        return {
            "config": asdict(self.config),
            "means": self.means(),
            "n_images": len(self.images),
            "images": [asdict(im) for im in self.images],
            "errors": self.errors,
        }


def evaluate_pair(preds: PredictionSet, gt: InstanceLabelMap, cfg: EvalConfig,
                  pred_path: str = "", gt_path: str = "") -> ImageMetrics:
    """Score one prediction set against one label map."""
    if preds.extent != gt.extent:
        raise InvalidInputError(
            f"prediction extent {preds.extent} != label map extent {gt.extent}"
        )
    want_agg = cfg.aggregate in ("both", "agg")
    want_nonagg = cfg.aggregate in ("both", "nonagg")
    return ImageMetrics(
        pred_path=pred_path,
        gt_path=gt_path,
        miou_agg=(
            miou(preds, gt, True, cfg.include_background_miou, cfg.min_overlap_frac)
            if want_agg else None
        ),
        miou_nonagg=(
            miou(preds, gt, False, cfg.include_background_miou, cfg.min_overlap_frac)
            if want_nonagg else None
        ),
        ari=ari(preds, gt, cfg.include_background_ari),
        n_pred_masks=len(preds),
        n_gt_regions=int(gt.region_ids().size),
    )


def _evaluate_one(args) -> tuple[int, ImageMetrics | None, dict | None]:
    index, pred_path, gt_path, cfg = args
    try:
        preds = load_predictions(pred_path)
        gt = load_label_map(gt_path)
        return index, evaluate_pair(preds, gt, cfg, str(pred_path), str(gt_path)), None
    except (TexbenchError, OSError) as exc:
        return index, None, {
            "index": index, "pred": str(pred_path), "gt": str(gt_path), "error": str(exc),
        }


def evaluate_dataset(pairs, cfg: EvalConfig | None = None, workers: int = 1) -> MetricsReport:
    """Evaluate (prediction file, label map file) pairs into a report.

    Per-pair failures are collected in the report's error list and excluded
    from the dataset means. Results are reduced in pair order, so the report
    is identical for any worker count.
    """
    cfg = cfg or EvalConfig()
    jobs = [(i, str(p), str(g), cfg) for i, (p, g) in enumerate(pairs)]
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_evaluate_one, jobs))
    else:
        results = [_evaluate_one(job) for job in jobs]
    report = MetricsReport(config=cfg)
    for _, metrics_row, error in sorted(results, key=lambda r: r[0]):
        if error is not None:
            log.warning("evaluation failed for %s: %s", error["pred"], error["error"])
            report.errors.append(error)
        else:
            report.images.append(metrics_row)
    return report


def write_report(report: MetricsReport, json_path) -> None:
    """Write the JSON report plus a per-image CSV sibling (same stem)."""
    json_path = str(json_path)
    with open(json_path, "w", encoding="utf-8") as fh:
        json.dump(report.to_json(), fh, indent=2)
        fh.write("\n")
    csv_path = json_path.rsplit(".", 1)[0] + ".csv"
    fields = ["pred_path", "gt_path", "miou_agg", "miou_nonagg", "ari",
              "n_pred_masks", "n_gt_regions"]
    with open(csv_path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=fields)
        writer.writeheader()
        for im in report.images:
            writer.writerow({k: getattr(im, k) for k in fields})
