"""Region feature pooling over a strided feature map."""

from __future__ import annotations

import torch
from torchvision.ops import roi_align

from ctxsearch.errors import DegenerateBoxError

# Sampling convention, shared with the brute-force oracle in the tests:
# half-pixel aligned coordinates, 2x2 bilinear samples per output bin.
SAMPLING_RATIO = 2
ALIGNED = True


def roi_extract(feature_map, boxes: torch.Tensor, output_resolution: int,
                image_size: tuple[int, int] | None = None) -> torch.Tensor:
    """Pool one [C, r, r] patch per box from a FeatureMap.

    boxes are (x1, y1, x2, y2) in input-image pixels. When image_size
    (height, width) is given, boxes are clipped to it first; a box that
    collapses to zero area raises DegenerateBoxError.
    """
    data, stride = feature_map.data, feature_map.stride
    if boxes.numel() == 0:
        return torch.zeros((0, data.shape[0], output_resolution, output_resolution),
                           dtype=data.dtype, device=data.device)
    boxes = boxes.to(data.dtype)
    if image_size is not None:
        h, w = image_size
        x1 = boxes[:, 0].clamp(0, w)
        y1 = boxes[:, 1].clamp(0, h)
        x2 = boxes[:, 2].clamp(0, w)
        y2 = boxes[:, 3].clamp(0, h)
        boxes = torch.stack([x1, y1, x2, y2], dim=1)
    degenerate = (boxes[:, 2] <= boxes[:, 0]) | (boxes[:, 3] <= boxes[:, 1])
    if bool(degenerate.any()):
        bad = boxes[degenerate][0].tolist()
        raise DegenerateBoxError(f"box {bad} has no area inside the image")
    rois = torch.cat([torch.zeros_like(boxes[:, :1]), boxes], dim=1)
    return roi_align(
        data[None],
        rois,
        (output_resolution, output_resolution),
        spatial_scale=1.0 / stride,
        sampling_ratio=SAMPLING_RATIO,
        aligned=ALIGNED,
    )
