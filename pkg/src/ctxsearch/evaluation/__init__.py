from ctxsearch.evaluation.metrics import (
    GalleryCandidate,
    MetricsReport,
    SearchResult,
    average_precision,
    detection_recall,
    evaluate_search,
    match_and_score,
)
from ctxsearch.evaluation.modes import cross_dataset_eval, evaluate_protocol, gallery_sweep
from ctxsearch.evaluation.ranking import rank_gallery
from ctxsearch.evaluation.reports import load_report, report_to_dict, save_report

__all__ = [
    "GalleryCandidate",
    "SearchResult",
    "MetricsReport",
    "average_precision",
    "detection_recall",
    "match_and_score",
    "evaluate_search",
    "rank_gallery",
    "evaluate_protocol",
    "gallery_sweep",
    "cross_dataset_eval",
    "report_to_dict",
    "save_report",
    "load_report",
]
