"""Image tensor preparation and scale-preserving resize."""

from __future__ import annotations

import numpy as np
import torch
from torch.nn import functional as F

IMAGE_MEAN = (0.485, 0.456, 0.406)
IMAGE_STD = (0.229, 0.224, 0.225)


def to_input_tensor(pixels: np.ndarray) -> torch.Tensor:
    """[H, W, 3] uint8 -> normalized float32 [3, H, W]."""
    if pixels.ndim != 3 or pixels.shape[2] != 3:
        raise ValueError(f"expected [H, W, 3] pixels, got shape {pixels.shape}")
    x = torch.from_numpy(np.ascontiguousarray(pixels)).permute(2, 0, 1).float() / 255.0
    mean = torch.tensor(IMAGE_MEAN).view(3, 1, 1)
    std = torch.tensor(IMAGE_STD).view(3, 1, 1)
    return (x - mean) / std


def resize_to_range(
    image: torch.Tensor,
    boxes: torch.Tensor | None,
    min_side: int | None,
    max_side: int | None,
) -> tuple[torch.Tensor, torch.Tensor | None, float]:
    """Scale so the short side hits min_side without the long side
    exceeding max_side.  Returns (image, boxes, scale); boxes (and any
    later outputs) map back to the original frame via division by scale.
    """
    if min_side is None:
        return image, boxes, 1.0
    _, h, w = image.shape
    short, long = min(h, w), max(h, w)
    scale = min(min_side / short, max_side / long)
    if abs(scale - 1.0) < 1e-9:
        return image, boxes, 1.0
    new_h = max(1, int(round(h * scale)))
    new_w = max(1, int(round(w * scale)))
    resized = F.interpolate(
        image.unsqueeze(0), size=(new_h, new_w), mode="bilinear", align_corners=False
    ).squeeze(0)
    if boxes is not None and boxes.numel():
        boxes = boxes * scale
    return resized, boxes, scale
