"""Anchor grid generation for the proposal network."""

from __future__ import annotations

import math

import torch


def anchor_shapes(sizes, aspect_ratios) -> torch.Tensor:
    """[A, 2] (width, height) pairs, one per size x ratio combination.

    aspect ratio = height / width at constant area size**2.
    """
    shapes = []
    for size in sizes:
        for ratio in aspect_ratios:
            h = size * math.sqrt(ratio)
            w = size / math.sqrt(ratio)
            shapes.append((w, h))
    return torch.tensor(shapes, dtype=torch.float32)


def grid_anchors(feature_height: int, feature_width: int, stride: int, shapes: torch.Tensor) -> torch.Tensor:
    """All anchors for one feature map, centered on cell centers.

    Returns [A * H * W, 4] xyxy boxes ordered anchor-major within each
    cell, cells in row-major order (matching a [A*4, H, W] conv output
    reshaped to [H*W*A, 4] via permute).
    """
    if feature_height <= 0 or feature_width <= 0:
        raise ValueError("feature map must be non-empty")
    ys = (torch.arange(feature_height, dtype=torch.float32) + 0.5) * stride
    xs = (torch.arange(feature_width, dtype=torch.float32) + 0.5) * stride
    cy, cx = torch.meshgrid(ys, xs, indexing="ij")
    centers = torch.stack([cx.reshape(-1), cy.reshape(-1)], dim=1)  # [HW, 2]

    half = shapes / 2.0  # [A, 2] (w/2, h/2)
    # [HW, A, 4] -> [HW * A, 4]
    x1 = centers[:, None, 0] - half[None, :, 0]
    y1 = centers[:, None, 1] - half[None, :, 1]
    x2 = centers[:, None, 0] + half[None, :, 0]
    y2 = centers[:, None, 1] + half[None, :, 1]
    return torch.stack([x1, y1, x2, y2], dim=2).reshape(-1, 4)
