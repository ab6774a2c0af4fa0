"""Training-time augmentation: random horizontal flip only."""

from __future__ import annotations

import numpy as np
import torch


def horizontal_flip_boxes(boxes: torch.Tensor, width: float) -> torch.Tensor:
    """Mirror (x1, y1, x2, y2) boxes across the vertical center line."""
    if boxes.numel() == 0:
        return boxes
    flipped = boxes.clone()
    flipped[:, 0] = width - boxes[:, 2]
    flipped[:, 2] = width - boxes[:, 0]
    return flipped


def maybe_flip(
    image: torch.Tensor,
    boxes: torch.Tensor,
    rng: np.random.Generator,
    probability: float = 0.5,
) -> tuple[torch.Tensor, torch.Tensor, bool]:
    """Flip a [3, H, W] image and its boxes with the given probability."""
    if rng.uniform() >= probability:
        return image, boxes, False
    width = image.shape[2]
    return torch.flip(image, dims=[2]), horizontal_flip_boxes(boxes, width), True
