"""Batch inference helpers: grouping, ordering and coordinate rescale."""

import numpy as np
import torch

from ctxsearch.data.types import DatasetIndex
from ctxsearch.engine.config import TrainConfig
from ctxsearch.engine.inference import (
    detect_images,
    embeddings_at_boxes,
    gt_box_embeddings,
)


def _config(**overrides):
    overrides.setdefault("queue_size", 16)
    return TrainConfig.toy_profile(**overrides)


def test_detect_images_covers_requested_ids(toy_model, tiny_pair):
    _, test = tiny_pair
    ids = [im.image_id for im in test.images[:2]]
    out = detect_images(toy_model, test, ids, _config())
    assert sorted(out) == sorted(ids)
    for image_id, embeddings in out.items():
        im = test.image(image_id)
        for emb in embeddings:
            x1, y1, x2, y2 = emb.box
            assert 0.0 <= x1 < x2 <= im.width
            assert 0.0 <= y1 < y2 <= im.height


def test_gt_box_embeddings_one_per_annotation(toy_model, tiny_pair):
    _, test = tiny_pair
    ids = [im.image_id for im in test.images]
    out = gt_box_embeddings(toy_model, test, ids, _config())
    for image_id in ids:
        anns = test.boxes_for(image_id)
        assert len(out[image_id]) == len(anns)
        for emb, ann in zip(out[image_id], anns):
            assert emb.box == ann.box


def test_gt_box_embeddings_empty_image(toy_model, tiny_pair):
    _, test = tiny_pair
    bare_id = test.images[0].image_id
    stripped = DatasetIndex(
        name=test.name, split=test.split, images=test.images,
        annotations=[a for a in test.annotations if a.image_id != bare_id],
        identities=test.identities,
    )
    out = gt_box_embeddings(toy_model, stripped, [bare_id], _config())
    assert out[bare_id] == []


def test_boxes_return_in_original_coordinates(toy_model, tiny_pair):
    _, test = tiny_pair
    # images are 48px; a 96 short-side target doubles them at inference
    config = _config(resize_min=96, resize_max=192)
    image_id = test.images[0].image_id
    out = gt_box_embeddings(toy_model, test, [image_id], config)
    for emb, ann in zip(out[image_id], test.boxes_for(image_id)):
        assert emb.box == ann.box


def test_embeddings_at_boxes_order_and_sharing(toy_model, tiny_pair):
    _, test = tiny_pair
    config = _config()
    img_a, img_b = test.images[0].image_id, test.images[1].image_id
    boxes_a = [a.box for a in test.boxes_for(img_a)][:2]
    box_b = test.boxes_for(img_b)[0].box
    assert len(boxes_a) == 2

    items = [(img_a, boxes_a[0]), (img_b, box_b), (img_a, boxes_a[1])]
    vectors = embeddings_at_boxes(toy_model, test, items, config)
    assert vectors.shape == (3, toy_model.embedding_dim)

    # same-image requests share one pass: the other boxes act as neighbors
    from ctxsearch.engine.transforms import to_input_tensor

    direct_a = toy_model.forward_infer(
        to_input_tensor(test.image(img_a).pixels),
        boxes=torch.tensor(boxes_a, dtype=torch.float32),
    )
    direct_b = toy_model.forward_infer(
        to_input_tensor(test.image(img_b).pixels),
        boxes=torch.tensor([box_b], dtype=torch.float32),
    )
    assert np.array_equal(vectors[0], direct_a[0].vector)
    assert np.array_equal(vectors[2], direct_a[1].vector)
    assert np.array_equal(vectors[1], direct_b[0].vector)
