"""Per-site and combined evaluation reports from GeoJSON inputs.

Predictions::

    {"type": "FeatureCollection", "frame": "utm32n",
     "features": [{"geometry": {...Polygon...},
                   "properties": {"score": 0.93, "site": "North Sea Basin"}}]}

Ground truth uses the same frame tag, an optional ``sites`` list fixing row
order (sites without targets included), Polygon features with
``kind: "farm"`` and Point/MultiPoint features with ``kind: "turbine"``.
"""
from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field
from typing import Optional

import numpy as np
import shapely
from shapely.geometry import Point, shape

from .metrics import (
    Detection,
    average_precision,
    cascade_merge,
    match_and_count,
    precision_recall_f1,
    score_filter_nms,
    turbine_recall,
)

COMBINED = "Combined"
NMS_READINGS = ("score", "overlap")


class FrameMismatchError(ValueError):
    pass


@dataclass(frozen=True)
class EvalConfig:
    score_threshold: float = 0.8
    nms_iou: float = 0.5
    merge_iou: float = 0.333
    match_iou: float = 0.33

    @classmethod
    def for_reading(cls, reading: str = "score", **kw) -> "EvalConfig":
        """``score``: 0.8 is a score filter. ``overlap``: 0.8 is the NMS IoU."""
        if reading not in NMS_READINGS:
            raise ValueError(f"unknown NMS reading {reading!r}")
        base = {"score_threshold": 0.8, "nms_iou": 0.5} if reading == "score" else \
            {"score_threshold": 0.0, "nms_iou": 0.8}
        base.update({k: v for k, v in kw.items() if v is not None})
        return cls(**base)


@dataclass
class SiteGroundTruth:
    name: str
    farms: list = field(default_factory=list)
    turbines: list = field(default_factory=list)


@dataclass(frozen=True)
class ReportRow:
    site: str
    gt: int
    tp: int
    fp: int
    fn: int
    rc: Optional[float]
    pr: Optional[float]
    f1: Optional[float]
    ap: Optional[float]
    gt_wt: int
    tp_wt: int
    rc_wt: Optional[float]


@dataclass(frozen=True)
class MetricsReport:
    rows: tuple[ReportRow, ...]
    config: EvalConfig
    frame: str = ""
    unassigned_turbines: int = 0

    def row(self, site: str) -> ReportRow:
        for r in self.rows:
            if r.site == site:
                return r
        raise KeyError(site)

    def to_json(self) -> dict:
        return {
            "frame": self.frame,
            "config": asdict(self.config),
            "unassigned_turbines": self.unassigned_turbines,
            "rows": [asdict(r) for r in self.rows],
        }


def _frame(doc: dict) -> str:
    return str(doc.get("frame", ""))


def load_predictions(doc: dict, default_site: str = "site") -> dict[str, list[Detection]]:
    out: dict[str, list[Detection]] = {}
    for feat in doc.get("features", []):
        props = feat.get("properties") or {}
        geom = shape(feat["geometry"])
        b = geom.bounds if geom.geom_type == "Polygon" and geom.equals(geom.envelope) else None
        det = Detection(geom, float(props.get("score", 1.0)), props.get("label", "windfarm"), b)
        out.setdefault(props.get("site", default_site), []).append(det)
    return out


def load_ground_truth(doc: dict, default_site: str = "site") -> dict[str, SiteGroundTruth]:
    sites: dict[str, SiteGroundTruth] = {name: SiteGroundTruth(name) for name in doc.get("sites", [])}
    for feat in doc.get("features", []):
        props = feat.get("properties") or {}
        name = props.get("site", default_site)
        site = sites.setdefault(name, SiteGroundTruth(name))
        geom = shape(feat["geometry"])
        kind = props.get("kind") or ("turbine" if geom.geom_type in ("Point", "MultiPoint") else "farm")
        if kind == "turbine":
            pts = getattr(geom, "geoms", [geom])
            site.turbines.extend(pts)
        else:
            b = geom.bounds if geom.equals(geom.envelope) else None
            site.farms.append(Detection(geom, 1.0, props.get("label", "windfarm"), b))
    return sites


def _unassigned(site: SiteGroundTruth) -> int:
    """Turbines not covered by exactly one farm geometry."""
    if not site.turbines:
        return 0
    xy = np.array([(p.x, p.y) for p in site.turbines])
    hits = np.zeros(len(xy), dtype=np.int64)
    for f in site.farms:
        # For a point, intersecting a polygon is the same as being covered by it.
        hits += shapely.intersects_xy(f.geometry, xy[:, 0], xy[:, 1])
    return int(np.count_nonzero(hits != 1))


def _row(name: str, gt: int, tp: int, fp: int, fn: int, ap: Optional[float],
         gt_wt: int, tp_wt: int) -> ReportRow:
    if gt == 0:
        return ReportRow(name, 0, tp, fp, fn, None, None, None, None, gt_wt, tp_wt, None)
    pr, rc, f1 = precision_recall_f1(tp, fp, fn)
    return ReportRow(name, gt, tp, fp, fn, rc, pr, f1, ap, gt_wt, tp_wt,
                     tp_wt / gt_wt if gt_wt else None)


def evaluate_sites(preds: dict[str, list[Detection]], truth: dict[str, SiteGroundTruth],
                   config: EvalConfig = EvalConfig(), frame: str = "") -> MetricsReport:
    names = list(truth) + [s for s in preds if s not in truth]
    rows = []
    pooled: list[tuple[float, bool]] = []
    totals = dict(gt=0, tp=0, fp=0, fn=0, gt_wt=0, tp_wt=0)
    unassigned = 0
    for name in names:
        site = truth.get(name, SiteGroundTruth(name))
        unassigned += _unassigned(site)
        kept = score_filter_nms(preds.get(name, []), config.score_threshold, config.nms_iou)
        merged = cascade_merge(kept, config.merge_iou)
        m = match_and_count(merged, site.farms, config.match_iou)
        pooled.extend(zip(m.scores, m.labels))
        gt_wt, tp_wt, _ = turbine_recall(merged, site.turbines)
        ap = average_precision(m.labels, len(site.farms)) if site.farms else None
        rows.append(_row(name, len(site.farms), m.tp, m.fp, m.fn, ap, gt_wt, tp_wt))
        for k, v in (("gt", len(site.farms)), ("tp", m.tp), ("fp", m.fp), ("fn", m.fn),
                     ("gt_wt", gt_wt), ("tp_wt", tp_wt)):
            totals[k] += v
    # Pooled ranking across sites; equal scores keep site order.
    pooled_labels = [lab for _, lab in sorted(pooled, key=lambda t: -t[0])]
    ap = average_precision(pooled_labels, totals["gt"]) if totals["gt"] else None
    combined = _row(COMBINED, totals["gt"], totals["tp"], totals["fp"], totals["fn"], ap,
                    totals["gt_wt"], totals["tp_wt"])
    return MetricsReport(tuple([combined] + rows), config, frame, unassigned)


def evaluate(pred_doc: dict, gt_doc: dict, config: EvalConfig = EvalConfig()) -> MetricsReport:
    if _frame(pred_doc) != _frame(gt_doc):
        raise FrameMismatchError(
            f"prediction frame {_frame(pred_doc)!r} differs from ground truth frame {_frame(gt_doc)!r}")
    return evaluate_sites(load_predictions(pred_doc), load_ground_truth(gt_doc), config, _frame(gt_doc))


def evaluate_files(pred_path, gt_path, config: EvalConfig = EvalConfig()) -> MetricsReport:
    with open(pred_path, encoding="utf-8") as fh:
        pred_doc = json.load(fh)
    with open(gt_path, encoding="utf-8") as fh:
        gt_doc = json.load(fh)
    return evaluate(pred_doc, gt_doc, config)


COLUMNS = ("Site", "GT", "TP", "FP", "FN", "Rc", "Pr", "F1", "AP", "GT_WT", "TP_WT", "Rc_WT")


def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, float):
        return f"{v:.3f}"
    return str(v)


def format_report(report: MetricsReport) -> str:
    """Aligned text table; sites without ground truth leave rate cells blank."""
    cells = [list(COLUMNS)]
    for r in report.rows:
        blank = r.gt == 0
        cells.append([
            r.site, _fmt(r.gt),
            "" if blank else _fmt(r.tp), _fmt(r.fp), "" if blank else _fmt(r.fn),
            _fmt(r.rc), _fmt(r.pr), _fmt(r.f1), _fmt(r.ap),
            "" if blank else _fmt(r.gt_wt), "" if blank else _fmt(r.tp_wt), _fmt(r.rc_wt),
        ])
    widths = [max(len(row[i]) for row in cells) for i in range(len(COLUMNS))]
    lines = []
    for k, row in enumerate(cells):
        parts = [row[0].ljust(widths[0])] + [c.rjust(w) for c, w in zip(row[1:], widths[1:])]
        lines.append("  ".join(parts).rstrip())
        if k == 0:
            lines.append("-" * len(lines[0]))
    return "\n".join(lines) + "\n"
