import numpy as np
import torch

from ctxsearch.engine.augment import horizontal_flip_boxes, maybe_flip


def test_reflection_arithmetic():
    boxes = torch.tensor([[10.0, 5.0, 30.0, 40.0]])
    flipped = horizontal_flip_boxes(boxes, width=100.0)
    assert flipped.tolist() == [[70.0, 5.0, 90.0, 40.0]]


def test_flip_is_involution():
    boxes = torch.tensor([[10.0, 5.0, 30.0, 40.0], [0.0, 0.0, 7.0, 9.0]])
    twice = horizontal_flip_boxes(horizontal_flip_boxes(boxes, 100.0), 100.0)
    assert torch.equal(twice, boxes)


def test_empty_boxes_pass_through():
    boxes = torch.zeros(0, 4)
    assert horizontal_flip_boxes(boxes, 50.0).shape == (0, 4)


def test_image_flip_mirrors_pixels_and_boxes():
    image = torch.arange(2 * 3 * 4, dtype=torch.float32).reshape(2, 3, 4)
    boxes = torch.tensor([[0.0, 0.0, 1.0, 1.0]])
    out, out_boxes, flipped = maybe_flip(image, boxes, np.random.default_rng(0),
                                         probability=1.0)
    assert flipped
    assert torch.equal(out, torch.flip(image, dims=[2]))
    assert out_boxes.tolist() == [[3.0, 0.0, 4.0, 1.0]]


def test_probability_zero_never_flips():
    image = torch.randn(3, 4, 4)
    boxes = torch.tensor([[1.0, 1.0, 2.0, 2.0]])
    out, out_boxes, flipped = maybe_flip(image, boxes, np.random.default_rng(0),
                                         probability=0.0)
    assert not flipped
    assert out is image and out_boxes is boxes


def test_fixed_seed_is_deterministic():
    image = torch.randn(3, 8, 8)
    boxes = torch.tensor([[1.0, 1.0, 4.0, 4.0]])
    decisions_a = [
        maybe_flip(image, boxes, np.random.default_rng(seed))[2]
        for seed in range(40)
    ]
    decisions_b = [
        maybe_flip(image, boxes, np.random.default_rng(seed))[2]
        for seed in range(40)
    ]
    assert decisions_a == decisions_b
    assert any(decisions_a) and not all(decisions_a)


def test_double_flip_restores_everything():
    image = torch.randn(3, 6, 10)
    boxes = torch.tensor([[2.0, 1.0, 7.0, 5.0]])
    once, once_boxes, _ = maybe_flip(image, boxes, np.random.default_rng(1),
                                     probability=1.0)
    twice, twice_boxes, _ = maybe_flip(once, once_boxes, np.random.default_rng(2),
                                       probability=1.0)
    assert torch.equal(twice, image)
    assert torch.equal(twice_boxes, boxes)
