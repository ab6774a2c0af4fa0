"""Box-level primitives shared by the proposal stage, both detection heads
and the evaluation code. Boxes are (x1, y1, x2, y2) corner coordinates."""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import torch
from torchvision.ops import nms as tv_nms

from ctxsearch.errors import DegenerateInputWarning

# keep decoded sizes finite for extreme regression outputs
_DELTA_CLIP = math.log(1000.0 / 16)


@dataclass(frozen=True)
class Detection:
    box: tuple[float, float, float, float]
    score: float
    source: str = "first_head"  # first_head | second_head | ground_truth

    def __post_init__(self):
        x1, y1, x2, y2 = self.box
        if not (x2 > x1 and y2 > y1):
            raise ValueError(f"degenerate box {self.box}")
        if not 0.0 <= self.score <= 1.0:
            raise ValueError(f"score must be in [0, 1], got {self.score}")


def iou(box_a, box_b) -> float:
    """Intersection over union of two boxes; zero-area inputs give 0."""
    ax1, ay1, ax2, ay2 = box_a
    bx1, by1, bx2, by2 = box_b
    area_a = max(0.0, ax2 - ax1) * max(0.0, ay2 - ay1)
    area_b = max(0.0, bx2 - bx1) * max(0.0, by2 - by1)
    if area_a == 0.0 or area_b == 0.0:
        warnings.warn("iou of a zero-area box", DegenerateInputWarning)
        return 0.0
    iw = min(ax2, bx2) - max(ax1, bx1)
    ih = min(ay2, by2) - max(ay1, by1)
    if iw <= 0.0 or ih <= 0.0:
        return 0.0
    inter = iw * ih
    return inter / (area_a + area_b - inter)


def box_iou_matrix(a: torch.Tensor, b: torch.Tensor) -> torch.Tensor:
    """Pairwise IoU, [N, M]. Zero-area boxes yield IoU 0."""
    area_a = (a[:, 2] - a[:, 0]).clamp(min=0) * (a[:, 3] - a[:, 1]).clamp(min=0)
    area_b = (b[:, 2] - b[:, 0]).clamp(min=0) * (b[:, 3] - b[:, 1]).clamp(min=0)
    lt = torch.max(a[:, None, :2], b[None, :, :2])
    rb = torch.min(a[:, None, 2:], b[None, :, 2:])
    wh = (rb - lt).clamp(min=0)
    inter = wh[..., 0] * wh[..., 1]
    union = area_a[:, None] + area_b[None, :] - inter
    return torch.where(union > 0, inter / union, torch.zeros_like(inter))


def nms_indices(boxes: torch.Tensor, scores: torch.Tensor,
                iou_threshold: float) -> torch.Tensor:
    """Greedy suppression. Order: score descending, then box coordinates
    ascending, then original index ascending; entries overlapping a kept one
    with IoU > iou_threshold are dropped. Returns kept indices."""
    n = boxes.shape[0]
    if n == 0:
        return torch.empty(0, dtype=torch.long)
    if torch.unique(scores).numel() == n:
        # no score ties: the greedy outcome is unique, so the batched
        # kernel gives the same result as the explicit ordering below
        return tv_nms(boxes.to(torch.float64), scores.to(torch.float64),
                      float(iou_threshold))
    order = sorted(
        range(n),
        key=lambda i: (-float(scores[i]), tuple(boxes[i].tolist()), i),
    )
    ious = box_iou_matrix(boxes, boxes)
    suppressed = torch.zeros(n, dtype=torch.bool)
    keep = []
    for i in order:
        if suppressed[i]:
            continue
        keep.append(i)
        suppressed |= ious[i] > iou_threshold
    return torch.tensor(keep, dtype=torch.long)


def nms(detections: list[Detection], iou_threshold: float) -> list[Detection]:
    """Greedy NMS over Detection records; result keeps selection order."""
    if not detections:
        return []
    boxes = torch.tensor([d.box for d in detections], dtype=torch.float32)
    scores = torch.tensor([d.score for d in detections], dtype=torch.float32)
    keep = nms_indices(boxes, scores, iou_threshold)
    return [detections[int(i)] for i in keep]


def clip_boxes(boxes: torch.Tensor, width, height) -> torch.Tensor:
    x1 = boxes[:, 0].clamp(0, width)
    y1 = boxes[:, 1].clamp(0, height)
    x2 = boxes[:, 2].clamp(0, width)
    y2 = boxes[:, 3].clamp(0, height)
    return torch.stack([x1, y1, x2, y2], dim=1)


def encode_deltas(anchors: torch.Tensor, targets: torch.Tensor) -> torch.Tensor:
    """Center/size offsets of targets relative to anchors."""
    aw = anchors[:, 2] - anchors[:, 0]
    ah = anchors[:, 3] - anchors[:, 1]
    ax = anchors[:, 0] + 0.5 * aw
    ay = anchors[:, 1] + 0.5 * ah
    tw = targets[:, 2] - targets[:, 0]
    th = targets[:, 3] - targets[:, 1]
    tx = targets[:, 0] + 0.5 * tw
    ty = targets[:, 1] + 0.5 * th
    return torch.stack([
        (tx - ax) / aw,
        (ty - ay) / ah,
        torch.log(tw / aw),
        torch.log(th / ah),
    ], dim=1)


def decode_deltas(anchors: torch.Tensor, deltas: torch.Tensor) -> torch.Tensor:
    """Inverse of encode_deltas, with clamped size offsets."""
    aw = anchors[:, 2] - anchors[:, 0]
    ah = anchors[:, 3] - anchors[:, 1]
    ax = anchors[:, 0] + 0.5 * aw
    ay = anchors[:, 1] + 0.5 * ah
    dx, dy = deltas[:, 0], deltas[:, 1]
    dw = deltas[:, 2].clamp(max=_DELTA_CLIP)
    dh = deltas[:, 3].clamp(max=_DELTA_CLIP)
    cx = ax + dx * aw
    cy = ay + dy * ah
    w = aw * torch.exp(dw)
    h = ah * torch.exp(dh)
    return torch.stack([
        cx - 0.5 * w, cy - 0.5 * h, cx + 0.5 * w, cy + 0.5 * h,
    ], dim=1)


@dataclass
class TargetAssignment:
    """Per-proposal matching outcome against ground truth.

    labels: 1 positive, 0 negative, -1 ignored (between thresholds).
    matched_index: row of the matched ground-truth box, -1 when unmatched.
    regression_targets: encoded offsets toward the match (zeros if none).
    """

    labels: torch.Tensor
    matched_index: torch.Tensor
    regression_targets: torch.Tensor

    @property
    def positive(self) -> torch.Tensor:
        return self.labels == 1


def assign_targets(proposals: torch.Tensor, ground_truth: torch.Tensor,
                   iou_threshold: float = 0.5,
                   low_threshold: float | None = None) -> TargetAssignment:
    """Label every proposal by its max-IoU ground-truth box.

    A proposal is positive iff its best IoU >= iou_threshold; below
    low_threshold (default: same value) it is negative, in between ignored.
    Ties between ground-truth boxes go to the lowest index.
    """
    n = proposals.shape[0]
    low = iou_threshold if low_threshold is None else low_threshold
    labels = torch.zeros(n, dtype=torch.long)
    matched = torch.full((n,), -1, dtype=torch.long)
    reg = torch.zeros((n, 4), dtype=proposals.dtype)
    if ground_truth.numel() == 0 or n == 0:
        return TargetAssignment(labels, matched, reg)
    ious = box_iou_matrix(proposals, ground_truth)
    best, best_idx = ious.max(dim=1)
    pos = best >= iou_threshold
    ignored = (~pos) & (best >= low)
    labels[ignored] = -1
    labels[pos] = 1
    matched[pos] = best_idx[pos]
    if pos.any():
        reg[pos] = encode_deltas(proposals[pos], ground_truth[best_idx[pos]])
    return TargetAssignment(labels, matched, reg)
