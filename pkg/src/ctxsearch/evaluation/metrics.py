"""Search metrics: per-query average precision and top-1 accuracy.

A ranked detection counts as correct when it overlaps an unclaimed
ground-truth box of the query identity (IoU >= 0.5) in its gallery
image; each ground-truth box can be claimed once, by the highest-ranked
detection that reaches it.  The AP denominator is the total number of
ground-truth instances of the identity in the gallery, so missed people
hurt the score even if every returned detection is correct.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ctxsearch.data.types import DatasetIndex, Query
from ctxsearch.errors import ProtocolError
from ctxsearch.evaluation.ranking import GalleryCandidate, rank_gallery


@dataclass
class SearchResult:
    query: Query
    ranked: list[GalleryCandidate]
    labels: list[bool]
    num_relevant: int
    ap: float
    top1: float


@dataclass
class MetricsReport:
    dataset: str
    mode: str  # "detected" or "ground_truth"
    mean_ap: float
    top1: float
    num_queries: int
    gallery_size: int | None = None
    results: list[SearchResult] = field(default_factory=list, repr=False)


def average_precision(labels, num_relevant: int) -> float:
    """AP of a ranked 0/1 relevance list against num_relevant targets."""
    if num_relevant <= 0:
        raise ProtocolError("query identity has no instances in its gallery")
    hits = 0
    total = 0.0
    for rank, correct in enumerate(labels, start=1):
        if correct:
            hits += 1
            total += hits / rank
    return total / num_relevant


def _iou(a, b) -> float:
    ix1, iy1 = max(a[0], b[0]), max(a[1], b[1])
    ix2, iy2 = min(a[2], b[2]), min(a[3], b[3])
    inter = max(0.0, ix2 - ix1) * max(0.0, iy2 - iy1)
    if inter <= 0.0:
        return 0.0
    area_a = (a[2] - a[0]) * (a[3] - a[1])
    area_b = (b[2] - b[0]) * (b[3] - b[1])
    return inter / (area_a + area_b - inter)


def match_and_score(
    query: Query,
    gallery_image_ids: list[str],
    candidates: list[GalleryCandidate],
    index: DatasetIndex,
    iou_threshold: float = 0.5,
) -> SearchResult:
    """Rank candidates and score them against the gallery ground truth."""
    targets: dict[str, list[tuple]] = {}
    num_relevant = 0
    for gid in gallery_image_ids:
        boxes = [ann.box for ann in index.boxes_for(gid) if ann.identity == query.identity]
        if boxes:
            targets[gid] = boxes
            num_relevant += len(boxes)
    if num_relevant == 0:
        raise ProtocolError(
            f"identity {query.identity} of query {query.image_id!r} "
            "does not appear in its gallery"
        )

    ranked = rank_gallery(candidates)
    claimed: set[tuple[str, int]] = set()
    labels = []
    for cand in ranked:
        correct = False
        best, best_iou = None, iou_threshold
        for slot, gt_box in enumerate(targets.get(cand.image_id, ())):
            if (cand.image_id, slot) in claimed:
                continue
            overlap = _iou(cand.box, gt_box)
            if overlap >= best_iou:
                best, best_iou = slot, overlap
        if best is not None:
            claimed.add((cand.image_id, best))
            correct = True
        labels.append(correct)

    ap = average_precision(labels, num_relevant)
    top1 = 1.0 if labels and labels[0] else 0.0
    return SearchResult(query, ranked, labels, num_relevant, ap, top1)


def evaluate_search(
    index: DatasetIndex,
    queries: list[Query],
    galleries: list[list[str]],
    query_vectors,
    gallery_embeddings: dict,
    iou_threshold: float = 0.5,
    dataset: str | None = None,
    mode: str = "detected",
    keep_results: bool = False,
) -> MetricsReport:
    """Score every query against its gallery.

    query_vectors is parallel to queries; gallery_embeddings maps an
    image id to that image's PersonEmbedding list (missing means no
    detections there).  Similarity is the plain inner product.
    """
    if len(queries) != len(query_vectors):
        raise ProtocolError("query vectors must align with queries")
    if len(queries) != len(galleries):
        raise ProtocolError("galleries must align with queries")
    if not queries:
        raise ProtocolError("protocol contains no queries")

    aps, top1s, results = [], [], []
    for query, gallery, vec in zip(queries, galleries, query_vectors):
        vec = np.asarray(vec, dtype=np.float32)
        candidates = []
        for gid in gallery:
            for j, emb in enumerate(gallery_embeddings.get(gid, ())):
                sim = float(vec @ np.asarray(emb.vector, dtype=np.float32))
                candidates.append(GalleryCandidate(gid, j, tuple(emb.box), sim))
        result = match_and_score(query, gallery, candidates, index, iou_threshold)
        aps.append(result.ap)
        top1s.append(result.top1)
        if keep_results:
            results.append(result)

    sizes = {len(g) for g in galleries}
    return MetricsReport(
        dataset=dataset or index.name,
        mode=mode,
        mean_ap=float(np.mean(aps)),
        top1=float(np.mean(top1s)),
        num_queries=len(queries),
        gallery_size=sizes.pop() if len(sizes) == 1 else None,
        results=results,
    )


def detection_recall(
    index: DatasetIndex,
    detections: dict,
    image_ids: list[str] | None = None,
    iou_threshold: float = 0.5,
) -> float:
    """Fraction of annotated people covered by some detection."""
    ids = image_ids if image_ids is not None else [im.image_id for im in index.images]
    total = hit = 0
    for gid in ids:
        gt = [ann.box for ann in index.boxes_for(gid)]
        total += len(gt)
        dets = sorted(detections.get(gid, ()), key=lambda e: -e.score)
        claimed = set()
        for det in dets:
            best, best_iou = None, iou_threshold
            for slot, box in enumerate(gt):
                if slot in claimed:
                    continue
                overlap = _iou(det.box, box)
                if overlap >= best_iou:
                    best, best_iou = slot, overlap
            if best is not None:
                claimed.add(best)
        hit += len(claimed)
    if total == 0:
        raise ProtocolError("no annotated boxes in the selected images")
    return hit / total
