"""Evaluation protocol construction: queries plus per-query galleries."""

from __future__ import annotations

import warnings

import numpy as np

from ctxsearch.data.types import DatasetIndex, EvalProtocol, Query
from ctxsearch.errors import ConfigurationError, ProtocolWarning


def build_protocol(index: DatasetIndex, gallery_size: int | None = None,
                   seed: int = 0) -> EvalProtocol:
    """Build the search protocol for a test index.

    Every labeled box whose identity occurs in at least one other image
    becomes a query. Its gallery holds all positive images (other images
    containing the identity) plus seeded random distractors up to
    gallery_size; the query's own image is always excluded. gallery_size
    None means the whole test set.
    """
    if index.split != "test":
        raise ConfigurationError("protocols are built over the test split")
    all_images = sorted(im.image_id for im in index.images)
    if gallery_size is not None:
        if gallery_size < 1:
            raise ConfigurationError(f"gallery_size must be positive, got {gallery_size}")
        if gallery_size > len(all_images):
            gallery_size = None  # saturated: whole test set

    images_of = {}
    for ann in index.annotations:
        if ann.labeled:
            images_of.setdefault(ann.identity, set()).add(ann.image_id)

    rng = np.random.default_rng(seed)
    queries, galleries = [], []
    enlarged = 0
    for ann in sorted(
        (a for a in index.annotations if a.labeled),
        key=lambda a: (a.image_id, a.box),
    ):
        positives = sorted(images_of[ann.identity] - {ann.image_id})
        if not positives:
            continue
        if gallery_size is None:
            gallery = [i for i in all_images if i != ann.image_id]
        elif len(positives) >= gallery_size:
            if len(positives) > gallery_size:
                enlarged += 1
            gallery = positives
        else:
            candidates = [i for i in all_images
                          if i != ann.image_id and i not in images_of[ann.identity]]
            k = min(gallery_size - len(positives), len(candidates))
            picked = rng.choice(len(candidates), size=k, replace=False)
            gallery = positives + [candidates[int(j)] for j in picked]
        queries.append(Query(ann.image_id, ann.box, ann.identity))
        galleries.append(gallery)

    if enlarged:
        warnings.warn(
            f"{enlarged} galleries enlarged beyond gallery_size to fit positives",
            ProtocolWarning,
        )
    return EvalProtocol(queries=queries, galleries=galleries,
                        gallery_size=gallery_size)
