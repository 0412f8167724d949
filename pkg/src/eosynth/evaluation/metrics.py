"""Detection geometry, post-processing and metrics.

Axis-aligned boxes are intersected directly; any other shape (including
merged detections) goes through shapely polygon overlays.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
from shapely.geometry import Point, box as shapely_box
from shapely.geometry.base import BaseGeometry
from shapely.ops import unary_union
from shapely.prepared import prep

LABEL = "windfarm"


@dataclass(frozen=True)
class AnchorConfig:
    model_input: tuple[float, float] = (1024, 1024)
    image_size: tuple[float, float] = (2048, 2048)
    stride: float = 16
    base_anchor: tuple[float, float] = (4, 4)

    def __post_init__(self):
        vals = (*self.model_input, *self.image_size, self.stride, *self.base_anchor)
        if any(not (v > 0) for v in vals):
            raise ValueError("anchor configuration values must be positive")


def anchor_scales(cfg: AnchorConfig, sizes: Sequence) -> list[float]:
    """Scale factor per target size; sizes are pixels, scalar or (h, w)."""
    mh, mw = cfg.model_input
    ih, iw = cfg.image_size
    ah, aw = cfg.base_anchor
    out = []
    for s in sizes:
        th, tw = (s, s) if np.isscalar(s) else s
        if not (th > 0 and tw > 0):
            raise ValueError(f"target size {s!r} must be positive")
        out.append(math.sqrt(th * tw * (mh * mw) / (ih * iw)) / (cfg.stride * ah * aw))
    return out


def ontology_target_sizes(o, quantum: int = 128) -> list[int]:
    """Farm sizes declared in the ontology, in pixels, rounded up to ``quantum``."""
    res = o.scene.sensor_resolution if o.scene else 10.0
    values = set()
    for char in ("size", "min_size"):
        for dim in o.dimensions_of("WindFarm", char):
            values.update(dim.numeric_values())
    return sorted({int(math.ceil(v / res / quantum) * quantum) for v in values if v > 0})


@dataclass(frozen=True)
class Detection:
    geometry: BaseGeometry
    score: float = 1.0
    label: str = LABEL
    box: Optional[tuple[float, float, float, float]] = None

    def __post_init__(self):
        if not 0.0 <= self.score <= 1.0:
            raise ValueError(f"score {self.score} outside [0, 1]")
        if self.geometry.area <= 0:
            raise ValueError("detection geometry is degenerate")

    @classmethod
    def from_box(cls, minx, miny, maxx, maxy, score: float = 1.0, label: str = LABEL) -> "Detection":
        b = (float(minx), float(miny), float(maxx), float(maxy))
        return cls(shapely_box(*b), score, label, b)


@dataclass(frozen=True)
class MergedDetection:
    geometry: BaseGeometry
    score: float
    members: tuple[int, ...]
    label: str = LABEL


def _geom(x):
    return x.geometry if hasattr(x, "geometry") else x


def _box_of(x):
    return getattr(x, "box", None)


def box_iou(a, b) -> float:
    ix = min(a[2], b[2]) - max(a[0], b[0])
    iy = min(a[3], b[3]) - max(a[1], b[1])
    if ix <= 0 or iy <= 0:
        return 0.0
    inter = ix * iy
    union = (a[2] - a[0]) * (a[3] - a[1]) + (b[2] - b[0]) * (b[3] - b[1]) - inter
    return inter / union


def iou(a, b) -> float:
    """Intersection over union of two detections, boxes or shapely geometries."""
    ba, bb = _box_of(a), _box_of(b)
    if ba is not None and bb is not None:
        return box_iou(ba, bb)
    ga, gb = _geom(a), _geom(b)
    inter = ga.intersection(gb).area
    if inter <= 0:
        return 0.0
    return inter / ga.union(gb).area


def score_filter_nms(dets: Sequence[Detection], score_threshold: float = 0.8,
                     overlap_threshold: float = 0.5) -> list[Detection]:
    """Drop scores below the threshold, then greedy suppression by score."""
    order = sorted((d for d in dets if d.score >= score_threshold), key=lambda d: -d.score)
    kept: list[Detection] = []
    for d in order:
        if all(iou(d, k) < overlap_threshold for k in kept):
            kept.append(d)
    return kept


def cascade_merge(dets: Sequence[Detection], min_iou: float = 0.333) -> list[MergedDetection]:
    """Union overlapping detections, seeded from the highest score.

    Each seed absorbs any remaining detection at IoU >= ``min_iou`` with the
    growing union until nothing changes. Outputs that still overlap each
    other at ``min_iou`` are then merged pairwise, so the result is pairwise
    below the threshold.
    """
    order = sorted(range(len(dets)), key=lambda i: -dets[i].score)
    remaining = list(order)
    merged: list[MergedDetection] = []
    while remaining:
        seed = remaining.pop(0)
        geom, members = dets[seed].geometry, [seed]
        changed = True
        while changed:
            changed = False
            for j in list(remaining):
                if iou(geom, dets[j].geometry) >= min_iou:
                    geom = unary_union([geom, dets[j].geometry])
                    members.append(j)
                    remaining.remove(j)
                    changed = True
        merged.append(MergedDetection(geom, max(dets[m].score for m in members), tuple(members),
                                      dets[seed].label))
    while True:
        pair = next(((i, j) for i in range(len(merged)) for j in range(i + 1, len(merged))
                     if iou(merged[i].geometry, merged[j].geometry) >= min_iou), None)
        if pair is None:
            return merged
        i, j = pair
        a, b = merged[i], merged[j]
        merged[i] = MergedDetection(unary_union([a.geometry, b.geometry]), max(a.score, b.score),
                                    a.members + b.members, a.label)
        del merged[j]


@dataclass(frozen=True)
class MatchResult:
    tp: int
    fp: int
    fn: int
    labels: tuple[bool, ...]       # per prediction, in descending score order
    scores: tuple[float, ...]
    matched_gt: tuple[Optional[int], ...]


def match_and_count(preds: Sequence, gt: Sequence, tau: float = 0.33) -> MatchResult:
    """Greedy by score: each prediction takes the unmatched GT of highest IoU.

    IoU ties go to the lower GT index; a prediction below ``tau`` is a false
    positive.
    """
    order = sorted(range(len(preds)), key=lambda i: -preds[i].score)
    free = [True] * len(gt)
    labels, scores, matched = [], [], []
    for i in order:
        best, best_iou = None, -1.0
        for g in range(len(gt)):
            if not free[g]:
                continue
            v = iou(preds[i], gt[g])
            if v > best_iou:
                best, best_iou = g, v
        hit = best is not None and best_iou >= tau
        if hit:
            free[best] = False
        labels.append(hit)
        scores.append(preds[i].score)
        matched.append(best if hit else None)
    tp = sum(labels)
    return MatchResult(tp, len(labels) - tp, len(gt) - tp, tuple(labels), tuple(scores), tuple(matched))


def _ratio(a: float, b: float) -> float:
    return a / b if b else 0.0


def precision_recall_f1(tp: int, fp: int, fn: int) -> tuple[float, float, float]:
    if min(tp, fp, fn) < 0:
        raise ValueError("counts must be non-negative")
    pr = _ratio(tp, tp + fp)
    rc = _ratio(tp, tp + fn)
    return pr, rc, _ratio(2 * pr * rc, pr + rc)


def precision_recall_curve(labels: Sequence[bool], n_gt: int) -> tuple[np.ndarray, np.ndarray]:
    hits = np.cumsum(np.asarray(labels, dtype=np.int64))
    ranks = np.arange(1, len(hits) + 1)
    return hits / ranks, hits / n_gt


def interpolated_precision(precision: np.ndarray) -> np.ndarray:
    """Precision at each rank replaced by the maximum at any later rank."""
    if len(precision) == 0:
        return precision
    return np.maximum.accumulate(precision[::-1])[::-1]


def average_precision(labels: Sequence[bool], n_gt: int) -> float:
    """All-point interpolated AP over predictions ranked by descending score."""
    if n_gt <= 0:
        raise ValueError("average precision is undefined without ground truth")
    if len(labels) == 0:
        return 0.0
    prec, rec = precision_recall_curve(labels, n_gt)
    interp = interpolated_precision(prec)
    prev = np.concatenate([[0.0], rec[:-1]])
    return float(np.sum((rec - prev) * interp))


def turbine_recall(preds: Sequence, points) -> tuple[int, int, float]:
    pts = [p if isinstance(p, Point) else Point(*p) for p in points]
    gt_wt = len(pts)
    if not preds or not gt_wt:
        return gt_wt, 0, 0.0
    cover = prep(unary_union([_geom(p) for p in preds]))
    tp_wt = sum(1 for p in pts if cover.covers(p))
    return gt_wt, tp_wt, _ratio(tp_wt, gt_wt)


def chip_plan(height: int, width: int, chip: int = 2048, overlap: float = 0.5) -> list[tuple[int, int, int, int]]:
    """Windows ``(row0, col0, row1, col1)`` at stride ``chip * (1 - overlap)``.

    The last window on each axis is clamped to the image edge.
    """
    if chip <= 0 or not 0 <= overlap < 1:
        raise ValueError("chip must be positive and overlap in [0, 1)")
    stride = max(1, int(round(chip * (1 - overlap))))

    def starts(n: int) -> list[int]:
        if n <= chip:
            return [0]
        out = list(range(0, n - chip + 1, stride))
        if out[-1] != n - chip:
            out.append(n - chip)
        return out

    return [(r, c, min(r + chip, height), min(c + chip, width))
            for r in starts(height) for c in starts(width)]
