"""Post-processing and metrics for farm detections."""
from __future__ import annotations

from .fixtures import table1_fixture
from .metrics import (
    AnchorConfig,
    Detection,
    MatchResult,
    MergedDetection,
    anchor_scales,
    average_precision,
    box_iou,
    cascade_merge,
    chip_plan,
    interpolated_precision,
    iou,
    match_and_count,
    ontology_target_sizes,
    precision_recall_curve,
    precision_recall_f1,
    score_filter_nms,
    turbine_recall,
)
from .report import (
    COMBINED,
    EvalConfig,
    FrameMismatchError,
    MetricsReport,
    ReportRow,
    evaluate,
    evaluate_files,
    evaluate_sites,
    format_report,
    load_ground_truth,
    load_predictions,
)
