"""Per-frame fish counting, annotation-frame sampling, and detector metrics.

Evaluation is single-class (fish, class 0). Matching is greedy per frame:
predictions in descending confidence order (ties broken by input order) each
claim the unmatched ground truth of highest IoU at or above the threshold.
The precision-recall curve is pooled globally across frames and AP uses
all-point (precision envelope) interpolation, so small instances can be
checked exactly against a brute-force oracle.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .ingest.detections import Detection, DetectionSet

__all__ = [
    "FISH_CLASS_ID",
    "EvalConfig",
    "EvalReport",
    "count_fish",
    "sample_annotation_frames",
    "iou",
    "average_precision",
    "evaluate",
    "precision_recall_points",
]

FISH_CLASS_ID = 0

COCO_THRESHOLDS = tuple(round(0.5 + 0.05 * k, 2) for k in range(10))


@dataclass(frozen=True)
class EvalConfig:
    """IoU thresholds to sweep and the confidence cutoff used for counting."""

    iou_thresholds: tuple[float, ...] = COCO_THRESHOLDS
    count_confidence: float = 0.25

    def __post_init__(self):
        ts = tuple(float(t) for t in self.iou_thresholds)
        if not ts:
            raise ValueError("iou_thresholds must not be empty")
        if any(not (0.0 < t < 1.0) for t in ts):
            raise ValueError(f"iou_thresholds must lie in (0, 1), got {ts}")
        if any(b <= a for a, b in zip(ts, ts[1:])):
            raise ValueError(f"iou_thresholds must be strictly increasing, got {ts}")
        if not (0.0 <= self.count_confidence <= 1.0):
            raise ValueError(f"count_confidence must be in [0, 1], got {self.count_confidence}")
        object.__setattr__(self, "iou_thresholds", ts)


@dataclass(frozen=True)
class EvalReport:
    """Detector quality summary.

    ``mean_ap`` averages the APs of all configured thresholds (the COCO-style
    mAP@[.5:.95] under the default config). TP/FP/FN are tallied at the
    counting confidence cutoff using the lowest IoU threshold.
    """

    ap_by_threshold: dict[float, float] = field(default_factory=dict)
    map50: float | None = None
    mean_ap: float = 0.0
    true_positives: int = 0
    false_positives: int = 0
    false_negatives: int = 0
    n_frames: int = 0
    n_ground_truth: int = 0
    n_predictions: int = 0

    @property
    def is_empty(self) -> bool:
        return self.n_frames == 0


def count_fish(frame: list[Detection], conf_threshold: float) -> int:
    """Number of fish-class detections at or above the confidence threshold."""
    return sum(1 for d in frame if d.class_id == FISH_CLASS_ID and d.confidence >= conf_threshold)


def sample_annotation_frames(
    num_frames: int, fps: float, interval_s: float = 20.0, bracket_s: float = 1.0
) -> list[int]:
    """Frame indices to annotate: anchors every ``interval_s`` plus a bracket
    frame one ``bracket_s`` before and after each anchor.

    Indices are clamped to ``[0, num_frames)``, deduplicated, and sorted.
    """
    if fps <= 0:
        raise ValueError(f"fps must be > 0, got {fps}")
    if not (interval_s > bracket_s > 0):
        raise ValueError(
            f"need interval_s > bracket_s > 0, got interval_s={interval_s}, bracket_s={bracket_s}"
        )
    if num_frames <= 0:
        return []

    indices: set[int] = set()
    anchor = 0
    while True:
        t = anchor * interval_s
        if t * fps >= num_frames:
            break
        for dt in (-bracket_s, 0.0, bracket_s):
            idx = round((t + dt) * fps)
            indices.add(min(max(idx, 0), num_frames - 1))
        anchor += 1
    return sorted(indices)


def iou(a: Detection, b: Detection) -> float:
    """Intersection-over-union of two boxes in normalized image coordinates."""
    ax0, ay0, ax1, ay1 = a.corners()
    bx0, by0, bx1, by1 = b.corners()
    iw = min(ax1, bx1) - max(ax0, bx0)
    ih = min(ay1, by1) - max(ay0, by0)
    if iw <= 0.0 or ih <= 0.0:
        return 0.0
    inter = iw * ih
    # Areas from the same corner coordinates so identical boxes give exactly 1.
    union = (ax1 - ax0) * (ay1 - ay0) + (bx1 - bx0) * (by1 - by0) - inter
    return inter / union


def _sorted_by_confidence(preds: list[Detection]) -> list[Detection]:
    # Stable sort: equal confidences keep input order.
    return sorted(preds, key=lambda d: -d.confidence)


def _fish_only(dets: list[Detection]) -> list[Detection]:
    return [d for d in dets if d.class_id == FISH_CLASS_ID]


def _match_flags(preds_sorted: list[Detection], gts: list[Detection], iou_thresh: float) -> list[bool]:
    """True-positive flag per prediction (already sorted by confidence)."""
    claimed = [False] * len(gts)
    flags = []
    for p in preds_sorted:
        best_gt = -1
        best_iou = 0.0
        for gi, g in enumerate(gts):
            if claimed[gi]:
                continue
            v = iou(p, g)
            if v >= iou_thresh and v > best_iou:
                best_gt = gi
                best_iou = v
        if best_gt >= 0:
            claimed[best_gt] = True
            flags.append(True)
        else:
            flags.append(False)
    return flags


def _ap_from_flags(flags: list[bool], n_gt: int) -> float:
    """All-point interpolated AP from pooled TP flags in confidence order."""
    if n_gt == 0:
        return 1.0 if not flags else 0.0
    tp = fp = 0
    recalls = []
    precisions = []
    for f in flags:
        if f:
            tp += 1
        else:
            fp += 1
        recalls.append(tp / n_gt)
        precisions.append(tp / (tp + fp))

    mrec = [0.0] + recalls + [1.0]
    mpre = [0.0] + precisions + [0.0]
    for k in range(len(mpre) - 2, -1, -1):
        mpre[k] = max(mpre[k], mpre[k + 1])
    ap = 0.0
    for k in range(1, len(mrec)):
        if mrec[k] != mrec[k - 1]:
            ap += (mrec[k] - mrec[k - 1]) * mpre[k]
    return ap


def average_precision(preds: list[Detection], gts: list[Detection], iou_thresh: float) -> float:
    """AP for one pooled set of predictions against one pool of ground truths.

    Zero ground truths is defined as AP 1.0 with no predictions and 0.0
    otherwise.
    """
    preds = _fish_only(preds)
    gts = _fish_only(gts)
    preds_sorted = _sorted_by_confidence(preds)
    flags = _match_flags(preds_sorted, gts, iou_thresh)
    return _ap_from_flags(flags, len(gts))


def _pooled_flags(preds: DetectionSet, gts: DetectionSet, iou_thresh: float):
    """(confidence, tp) per prediction, matched per frame, pooled and sorted."""
    pooled: list[tuple[float, bool]] = []
    n_gt = 0
    for fid in sorted(set(preds) | set(gts)):
        frame_preds = _sorted_by_confidence(_fish_only(preds.get(fid, [])))
        frame_gts = _fish_only(gts.get(fid, []))
        n_gt += len(frame_gts)
        flags = _match_flags(frame_preds, frame_gts, iou_thresh)
        pooled.extend((p.confidence, f) for p, f in zip(frame_preds, flags))
    pooled.sort(key=lambda t: -t[0])  # stable: ties keep frame order
    return pooled, n_gt


def evaluate(preds: DetectionSet, gts: DetectionSet, cfg: EvalConfig | None = None) -> EvalReport:
    """Evaluate predictions against ground truth over their combined frames.

    Frames missing from either set count as observed-empty on that side. An
    empty combined frame set yields an explicit empty report.
    """
    cfg = cfg or EvalConfig()
    universe = sorted(set(preds) | set(gts))
    if not universe:
        return EvalReport()

    ap_by_threshold: dict[float, float] = {}
    for thresh in cfg.iou_thresholds:
        pooled, n_gt = _pooled_flags(preds, gts, thresh)
        ap_by_threshold[thresh] = _ap_from_flags([f for _, f in pooled], n_gt)

    # Operating-point counts: predictions at the counting confidence, matched
    # at the lowest configured IoU threshold.
    count_iou = cfg.iou_thresholds[0]
    tp = fp = fn = 0
    n_gt_total = 0
    n_pred_total = 0
    for fid in universe:
        frame_gts = _fish_only(gts.get(fid, []))
        all_preds = _fish_only(preds.get(fid, []))
        n_pred_total += len(all_preds)
        n_gt_total += len(frame_gts)
        kept = _sorted_by_confidence([p for p in all_preds if p.confidence >= cfg.count_confidence])
        flags = _match_flags(kept, frame_gts, count_iou)
        frame_tp = sum(flags)
        tp += frame_tp
        fp += len(kept) - frame_tp
        fn += len(frame_gts) - frame_tp

    aps = list(ap_by_threshold.values())
    return EvalReport(
        ap_by_threshold=ap_by_threshold,
        map50=ap_by_threshold.get(0.5),
        mean_ap=sum(aps) / len(aps),
        true_positives=tp,
        false_positives=fp,
        false_negatives=fn,
        n_frames=len(universe),
        n_ground_truth=n_gt_total,
        n_predictions=n_pred_total,
    )


def precision_recall_points(
    preds: DetectionSet, gts: DetectionSet, iou_thresh: float = 0.5
) -> list[tuple[float, float, float]]:
    """Pooled (confidence, precision, recall) per prediction for PR export."""
    pooled, n_gt = _pooled_flags(preds, gts, iou_thresh)
    points = []
    tp = fp = 0
    for conf, flag in pooled:
        if flag:
            tp += 1
        else:
            fp += 1
        recall = tp / n_gt if n_gt else 0.0
        points.append((conf, tp / (tp + fp), recall))
    return points
