"""Batch inference helpers used by the evaluation modes and the CLI."""

from __future__ import annotations

import numpy as np
import torch

from ctxsearch.context.types import PersonEmbedding
from ctxsearch.data.types import DatasetIndex
from ctxsearch.engine.config import TrainConfig
from ctxsearch.engine.transforms import resize_to_range, to_input_tensor
from ctxsearch.model import PersonSearchModel


def _prepare(sample, config: TrainConfig):
    image = to_input_tensor(sample.pixels)
    image, _, scale = resize_to_range(image, None, config.resize_min, config.resize_max)
    return image, scale


def _rescaled(embeddings: list[PersonEmbedding], scale: float) -> list[PersonEmbedding]:
    if scale == 1.0:
        return embeddings
    return [
        PersonEmbedding(
            box=tuple(v / scale for v in emb.box), score=emb.score, vector=emb.vector
        )
        for emb in embeddings
    ]


@torch.no_grad()
def detect_images(
    model: PersonSearchModel,
    index: DatasetIndex,
    image_ids,
    config: TrainConfig,
) -> dict[str, list[PersonEmbedding]]:
    """Run full detection + embedding on each image; boxes come back in
    original image coordinates."""
    out = {}
    for image_id in image_ids:
        image, scale = _prepare(index.image(image_id), config)
        embeddings = model.forward_infer(image, score_threshold=config.score_threshold)
        out[image_id] = _rescaled(embeddings, scale)
    return out


@torch.no_grad()
def gt_box_embeddings(
    model: PersonSearchModel,
    index: DatasetIndex,
    image_ids,
    config: TrainConfig,
) -> dict[str, list[PersonEmbedding]]:
    """Embed every annotated box, skipping detection entirely."""
    out = {}
    for image_id in image_ids:
        anns = index.boxes_for(image_id)
        if not anns:
            out[image_id] = []
            continue
        image, scale = _prepare(index.image(image_id), config)
        boxes = torch.tensor([a.box for a in anns], dtype=torch.float32) * scale
        embeddings = model.forward_infer(image, boxes=boxes)
        out[image_id] = _rescaled(embeddings, scale)
    return out


@torch.no_grad()
def embeddings_at_boxes(
    model: PersonSearchModel,
    index: DatasetIndex,
    items: list[tuple[str, tuple]],
    config: TrainConfig,
) -> np.ndarray:
    """Embedding for each (image_id, box) pair, in input order.

    Pairs from the same image share one backbone pass, and the other
    requested boxes of that image act as the group-context neighbors.
    """
    by_image: dict[str, list[int]] = {}
    for pos, (image_id, _) in enumerate(items):
        by_image.setdefault(image_id, []).append(pos)
    vectors: list[np.ndarray | None] = [None] * len(items)
    for image_id, positions in by_image.items():
        image, scale = _prepare(index.image(image_id), config)
        boxes = torch.tensor(
            [items[pos][1] for pos in positions], dtype=torch.float32
        ) * scale
        embeddings = model.forward_infer(image, boxes=boxes)
        for pos, emb in zip(positions, embeddings):
            vectors[pos] = emb.vector
    return np.stack(vectors)
