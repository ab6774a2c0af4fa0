"""Single-level region proposal network."""

from __future__ import annotations

from dataclasses import dataclass

import torch
from torch import nn
from torch.nn import functional as F

from ctxsearch.detection.anchors import anchor_shapes, grid_anchors
from ctxsearch.detection.backbone import FeatureMap
from ctxsearch.detection.boxes import (
    box_iou_matrix,
    clip_boxes,
    decode_deltas,
    encode_deltas,
    nms_indices,
)

_MIN_SIDE = 1.0


@dataclass
class RpnOutput:
    proposals: torch.Tensor  # [K, 4]
    scores: torch.Tensor  # [K]
    objectness: torch.Tensor  # [N] raw logits over all anchors
    deltas: torch.Tensor  # [N, 4]
    anchors: torch.Tensor  # [N, 4]


class ProposalNetwork(nn.Module):
    def __init__(
        self,
        in_channels: int,
        stride: int,
        anchor_sizes=(32, 64, 128, 256, 512),
        aspect_ratios=(0.5, 1.0, 2.0),
        mid_channels: int | None = None,
        pre_nms_top_n: int = 2000,
        post_nms_top_n: int = 300,
        pre_nms_top_n_test: int | None = None,
        post_nms_top_n_test: int | None = None,
        nms_threshold: float = 0.7,
        fg_iou: float = 0.7,
        bg_iou: float = 0.3,
        batch_size: int = 256,
        positive_fraction: float = 0.5,
    ):
        super().__init__()
        self.stride = stride
        shapes = anchor_shapes(anchor_sizes, aspect_ratios)
        self.register_buffer("shapes", shapes)
        num_anchors = shapes.shape[0]
        mid = mid_channels or in_channels
        self.conv = nn.Conv2d(in_channels, mid, kernel_size=3, padding=1)
        self.objectness = nn.Conv2d(mid, num_anchors, kernel_size=1)
        self.deltas = nn.Conv2d(mid, num_anchors * 4, kernel_size=1)
        for layer in (self.conv, self.objectness, self.deltas):
            nn.init.normal_(layer.weight, std=0.01)
            nn.init.constant_(layer.bias, 0.0)
        self.pre_nms_top_n = pre_nms_top_n
        self.post_nms_top_n = post_nms_top_n
        # evaluation can afford a wider net than training; None means
        # "same cap in both modes"
        self.pre_nms_top_n_test = pre_nms_top_n_test
        self.post_nms_top_n_test = post_nms_top_n_test
        self.nms_threshold = nms_threshold
        self.fg_iou = fg_iou
        self.bg_iou = bg_iou
        self.batch_size = batch_size
        self.positive_fraction = positive_fraction

    def forward(self, feature_map: FeatureMap, image_size: tuple[int, int]) -> RpnOutput:
        """Propose boxes for one image.  image_size is (height, width)."""
        x = torch.relu(self.conv(feature_map.data.unsqueeze(0)))
        logits = self.objectness(x)[0]  # [A, h, w]
        raw_deltas = self.deltas(x)[0]  # [4A, h, w]
        num_anchors = logits.shape[0]
        h, w = logits.shape[1], logits.shape[2]

        anchors = grid_anchors(h, w, self.stride, self.shapes).to(logits.device)
        logits = logits.permute(1, 2, 0).reshape(-1)
        raw_deltas = raw_deltas.view(num_anchors, 4, h, w).permute(2, 3, 0, 1).reshape(-1, 4)

        pre_n, post_n = self.pre_nms_top_n, self.post_nms_top_n
        if not self.training:
            pre_n = self.pre_nms_top_n_test if self.pre_nms_top_n_test is not None else pre_n
            post_n = self.post_nms_top_n_test if self.post_nms_top_n_test is not None else post_n

        with torch.no_grad():
            scores = torch.sigmoid(logits)
            top_n = min(pre_n, scores.numel())
            order = scores.topk(top_n).indices
            boxes = decode_deltas(anchors[order], raw_deltas[order])
            boxes = clip_boxes(boxes, image_size[1], image_size[0])
            keep_size = ((boxes[:, 2] - boxes[:, 0]) >= _MIN_SIDE) & (
                (boxes[:, 3] - boxes[:, 1]) >= _MIN_SIDE
            )
            boxes, kept_scores = boxes[keep_size], scores[order][keep_size]
            keep = nms_indices(boxes, kept_scores, self.nms_threshold)[:post_n]
            proposals, proposal_scores = boxes[keep], kept_scores[keep]

        return RpnOutput(
            proposals=proposals,
            scores=proposal_scores,
            objectness=logits,
            deltas=raw_deltas,
            anchors=anchors,
        )

    def losses(
        self,
        output: RpnOutput,
        ground_truth: torch.Tensor,
        generator: torch.Generator | None = None,
    ) -> dict[str, torch.Tensor]:
        """Objectness and box regression losses for one image."""
        anchors = output.anchors
        num = anchors.shape[0]
        labels = torch.full((num,), -1, dtype=torch.long)
        matched = torch.zeros(num, dtype=torch.long)
        if ground_truth.numel():
            iou = box_iou_matrix(anchors, ground_truth)
            max_iou, argmax = iou.max(dim=1)
            matched = argmax
            labels[max_iou < self.bg_iou] = 0
            labels[max_iou >= self.fg_iou] = 1
            # the best anchor for each box is always positive, so tiny or
            # oddly shaped people still get at least one anchor
            best_per_gt = iou.max(dim=0).values
            for g in range(ground_truth.shape[0]):
                hits = torch.nonzero(iou[:, g] == best_per_gt[g]).reshape(-1)
                labels[hits] = 1
                matched[hits] = g
        else:
            labels[:] = 0

        pos_idx = torch.nonzero(labels == 1).reshape(-1)
        neg_idx = torch.nonzero(labels == 0).reshape(-1)
        num_pos = min(int(self.batch_size * self.positive_fraction), pos_idx.numel())
        num_neg = min(self.batch_size - num_pos, neg_idx.numel())
        pos_idx = _sample(pos_idx, num_pos, generator)
        neg_idx = _sample(neg_idx, num_neg, generator)

        sampled = torch.cat([pos_idx, neg_idx])
        logits = output.objectness[sampled]
        targets = (labels[sampled] == 1).to(logits.dtype)
        cls_loss = F.binary_cross_entropy_with_logits(logits, targets)

        if pos_idx.numel():
            reg_targets = encode_deltas(anchors[pos_idx], ground_truth[matched[pos_idx]])
            reg_loss = F.smooth_l1_loss(output.deltas[pos_idx], reg_targets, reduction="sum")
            reg_loss = reg_loss / sampled.numel()
        else:
            reg_loss = output.deltas.sum() * 0.0
        return {"rpn_cls": cls_loss, "rpn_reg": reg_loss}


def _sample(indices: torch.Tensor, count: int, generator: torch.Generator | None) -> torch.Tensor:
    if count >= indices.numel():
        return indices
    perm = torch.randperm(indices.numel(), generator=generator)[:count]
    return indices[perm]
