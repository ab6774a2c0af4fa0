"""Evaluation drivers: detected boxes, ground-truth boxes, gallery
sweeps and cross-dataset transfer."""

from __future__ import annotations

from ctxsearch.data.protocol import build_protocol
from ctxsearch.data.types import DatasetIndex, EvalProtocol
from ctxsearch.engine.config import TrainConfig
from ctxsearch.engine.inference import detect_images, embeddings_at_boxes, gt_box_embeddings
from ctxsearch.evaluation.metrics import MetricsReport, evaluate_search


def _gallery_ids(protocol: EvalProtocol) -> list[str]:
    seen = {}
    for gallery in protocol.galleries:
        for gid in gallery:
            seen[gid] = None
    return list(seen)


def evaluate_protocol(
    model,
    index: DatasetIndex,
    protocol: EvalProtocol,
    config: TrainConfig,
    mode: str = "detected",
    keep_results: bool = False,
    dataset: str | None = None,
) -> MetricsReport:
    """Score a protocol with detected or ground-truth gallery boxes.

    Query embeddings always come from the annotated query boxes; the
    mode chooses what populates the gallery side.
    """
    if mode not in ("detected", "ground_truth"):
        raise ValueError(f"mode must be 'detected' or 'ground_truth', got {mode!r}")
    query_vectors = embeddings_at_boxes(
        model, index, [(q.image_id, q.box) for q in protocol.queries], config
    )
    gallery_ids = _gallery_ids(protocol)
    if mode == "detected":
        gallery = detect_images(model, index, gallery_ids, config)
    else:
        gallery = gt_box_embeddings(model, index, gallery_ids, config)
    return evaluate_search(
        index,
        protocol.queries,
        protocol.galleries,
        query_vectors,
        gallery,
        iou_threshold=config.iou_threshold,
        dataset=dataset or index.name,
        mode=mode,
        keep_results=keep_results,
    )


def gallery_sweep(
    model,
    index: DatasetIndex,
    sizes,
    config: TrainConfig,
    seed: int = 0,
    mode: str = "detected",
) -> list[MetricsReport]:
    """Evaluate at several gallery sizes (deduplicated, ascending)."""
    reports = []
    for size in sorted(set(sizes)):
        protocol = build_protocol(index, gallery_size=size, seed=seed)
        reports.append(evaluate_protocol(model, index, protocol, config, mode=mode))
    return reports


def cross_dataset_eval(
    model,
    source_name: str,
    target_index: DatasetIndex,
    protocol: EvalProtocol,
    config: TrainConfig,
    mode: str = "detected",
) -> MetricsReport:
    """Evaluate a model on a dataset it was not trained on.

    The report's dataset field records the transfer direction.
    """
    return evaluate_protocol(
        model,
        target_index,
        protocol,
        config,
        mode=mode,
        dataset=f"{source_name}->{target_index.name}",
    )
