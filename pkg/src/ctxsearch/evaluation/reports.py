"""Serialization of evaluation results."""

from __future__ import annotations

import json
from pathlib import Path

from ctxsearch.errors import ProtocolError
from ctxsearch.evaluation.metrics import MetricsReport

SCHEMA_VERSION = 1
KIND = "ctxsearch-metrics"


def report_to_dict(report: MetricsReport, **extra) -> dict:
    payload = {
        "schema_version": SCHEMA_VERSION,
        "kind": KIND,
        "dataset": report.dataset,
        "mode": report.mode,
        "mean_ap": report.mean_ap,
        "top1": report.top1,
        "num_queries": report.num_queries,
        "gallery_size": report.gallery_size,
    }
    payload.update(extra)
    if report.results:
        payload["per_query"] = [
            {
                "image_id": r.query.image_id,
                "identity": r.query.identity,
                "ap": r.ap,
                "top1": r.top1,
                "num_relevant": r.num_relevant,
            }
            for r in report.results
        ]
    return payload


def save_report(report: MetricsReport, path, **extra) -> None:
    Path(path).write_text(json.dumps(report_to_dict(report, **extra), indent=2) + "\n")


def load_report(path) -> dict:
    data = json.loads(Path(path).read_text())
    if data.get("kind") != KIND:
        raise ProtocolError(f"{path}: not a metrics report")
    if data.get("schema_version") != SCHEMA_VERSION:
        raise ProtocolError(
            f"{path}: schema version {data.get('schema_version')} "
            f"not supported (expected {SCHEMA_VERSION})"
        )
    return data
