"""End-to-end person search network.

One shared strided feature map feeds four consumers: the proposal
network, two sequential refinement heads, and the context branches.
Training returns raw loss ingredients (the re-ID memory bank lives in
the trainer); inference returns boxes with scores and unit embeddings.

Candidate flow at inference:

    backbone -> proposals -> first head -> NMS(first) ->
    second head + scene/group context -> fusion -> NMS(second)

During training the group context for a sampled box is pooled from the
ground-truth people in the image (minus the box's own identity); at
inference it is pooled from the first head's surviving detections, the
best available stand-in for "the other people in the frame".
"""

from __future__ import annotations

import torch
from torch import nn

from ctxsearch.context.encoder import ContextEncoder, gsc_encode, neighbor_max
from ctxsearch.context.fusion import build_fusion_head
from ctxsearch.context.types import PersonEmbedding
from ctxsearch.detection.backbone import build_backbone, extract_backbone
from ctxsearch.detection.boxes import (
    assign_targets,
    clip_boxes,
    decode_deltas,
    encode_deltas,
    nms_indices,
)
from ctxsearch.detection.heads import FirstHead, SecondHead
from ctxsearch.detection.roi import roi_extract
from ctxsearch.detection.rpn import ProposalNetwork
from ctxsearch.errors import ConfigurationError


def _sample_balanced(labels: torch.Tensor, batch_size: int, positive_fraction: float,
                     generator: torch.Generator | None) -> torch.Tensor:
    """Pick indices with roughly positive_fraction positives."""
    pos = torch.nonzero(labels == 1).reshape(-1)
    neg = torch.nonzero(labels == 0).reshape(-1)
    num_pos = min(int(batch_size * positive_fraction), pos.numel())
    num_neg = min(batch_size - num_pos, neg.numel())
    if num_pos < pos.numel():
        pos = pos[torch.randperm(pos.numel(), generator=generator)[:num_pos]]
    if num_neg < neg.numel():
        neg = neg[torch.randperm(neg.numel(), generator=generator)[:num_neg]]
    return torch.cat([pos, neg])


class PersonSearchModel(nn.Module):
    def __init__(
        self,
        backbone_profile: str = "resnet50",
        *,
        fusion_variant: str = "implicit",
        use_scene_context: bool = True,
        use_group_context: bool = True,
        se_reduction: int = 16,
        iou_threshold: float = 0.5,
        nms_first: float = 0.4,
        nms_second: float = 0.5,
        head_batch_size: int = 128,
        positive_fraction: float = 0.5,
        max_candidates: int = 128,
        cls_second_weighted: bool = True,
        weights_path: str | None = None,
        toy_channels: int = 128,
        rpn_kwargs: dict | None = None,
    ):
        super().__init__()
        self.backbone = build_backbone(backbone_profile, weights_path, toy_channels)
        channels = self.backbone.out_channels
        self.roi_resolution = self.backbone.roi_resolution

        defaults = dict(
            anchor_sizes=(32, 64, 128, 256, 512),
            aspect_ratios=(0.5, 1.0, 2.0),
            pre_nms_top_n=2000,
            post_nms_top_n=300,
        )
        if backbone_profile == "toy":
            defaults = dict(
                anchor_sizes=(12, 18, 26),
                aspect_ratios=(0.75, 1.0, 1.5),
                mid_channels=64,
                pre_nms_top_n=300,
                post_nms_top_n=64,
                pre_nms_top_n_test=600,
                post_nms_top_n_test=256,
            )
        defaults.update(rpn_kwargs or {})
        self.rpn = ProposalNetwork(channels, self.backbone.stride, **defaults)

        self.first_head = FirstHead(self.backbone.make_box_head())
        self.second_head = SecondHead(self.backbone.make_box_head())
        self.use_scene_context = use_scene_context
        self.use_group_context = use_group_context
        self.scene_encoder = ContextEncoder(channels) if use_scene_context else None
        self.group_encoder = ContextEncoder(channels) if use_group_context else None
        self.fusion = build_fusion_head(
            fusion_variant, use_scene_context, use_group_context, se_reduction
        )
        self.embedding_dim = self.fusion.out_dim

        self.iou_threshold = iou_threshold
        self.nms_first = nms_first
        self.nms_second = nms_second
        self.head_batch_size = head_batch_size
        self.positive_fraction = positive_fraction
        self.max_candidates = max_candidates
        self.cls_second_weighted = cls_second_weighted

    # ---------------------------------------------------------------- context

    def _scene_vectors(self, feature_map, count: int) -> torch.Tensor | None:
        if self.scene_encoder is None:
            return None
        vec = gsc_encode(self.scene_encoder, feature_map.data)
        return vec.unsqueeze(0).expand(count, -1)

    def _group_vectors(
        self,
        feature_map,
        image_size,
        neighbor_boxes: torch.Tensor,
        exclude: list[int | None],
    ) -> torch.Tensor | None:
        """One pooled co-traveler vector per target.

        neighbor_boxes are the people to pool from; exclude[i] is the
        index of target i's own box in that set (None when the target
        is not in the set, e.g. a background sample).
        """
        if self.group_encoder is None:
            return None
        count = len(exclude)
        if neighbor_boxes.numel() == 0:
            return feature_map.data.new_zeros(count, self.group_encoder.out_dim)
        rois = roi_extract(feature_map, neighbor_boxes, self.roi_resolution, image_size)
        encoded = self.group_encoder(rois)
        n = encoded.shape[0]
        rows = []
        for own in exclude:
            if own is None:
                rows.append(encoded.amax(dim=0) if n > 0 else encoded.new_zeros(encoded.shape[1]))
            elif n > 1:
                rows.append(neighbor_max(encoded, own))
            else:
                rows.append(encoded.new_zeros(encoded.shape[1]))
        return torch.stack(rows)

    # --------------------------------------------------------------- training

    def forward_train(
        self,
        images: list[torch.Tensor],
        gt_boxes: list[torch.Tensor],
        gt_identities: list[torch.Tensor],
        generator: torch.Generator | None = None,
    ) -> dict:
        """Loss ingredients for one batch.

        gt_identities holds per-box identity indices (UNLABELED for
        unnamed people).  Returns scalar detection losses plus the
        fused embeddings and identity labels of the sampled person
        boxes, from which the caller computes the re-ID loss.
        """
        if not (len(images) == len(gt_boxes) == len(gt_identities)):
            raise ConfigurationError("images, boxes and identities must align")
        parts = {k: [] for k in ("rpn_cls", "rpn_reg", "reg_first", "cls_first",
                                 "reg_second", "cls_second")}
        embeddings, reid_labels = [], []
        for image, boxes, identities in zip(images, gt_boxes, gt_identities):
            per_image = self._train_one(image, boxes, identities, generator)
            for key in parts:
                parts[key].append(per_image[key])
            embeddings.append(per_image["embeddings"])
            reid_labels.append(per_image["reid_labels"])
        out = {key: torch.stack(values).mean() for key, values in parts.items()}
        out["embeddings"] = torch.cat(embeddings)
        out["reid_labels"] = torch.cat(reid_labels)
        return out

    def _train_one(self, image, boxes, identities, generator):
        from ctxsearch.losses.detection import cls_loss_first, cls_loss_second, smooth_l1_reg

        image_size = (image.shape[1], image.shape[2])
        feature_map = extract_backbone(self.backbone, image)
        rpn_out = self.rpn(feature_map, image_size)
        rpn_losses = self.rpn.losses(rpn_out, boxes, generator)

        proposals = torch.cat([rpn_out.proposals, boxes])  # seed positives early
        assign1 = assign_targets(proposals, boxes, self.iou_threshold)
        take1 = _sample_balanced(assign1.labels, self.head_batch_size,
                                 self.positive_fraction, generator)
        sampled1 = proposals[take1]
        labels1 = assign1.labels[take1]
        rois1 = roi_extract(feature_map, sampled1, self.roi_resolution, image_size)
        logits1, deltas1 = self.first_head(rois1)
        cls1 = cls_loss_first(torch.softmax(logits1, dim=1), labels1)
        pos1 = labels1 == 1
        if bool(pos1.any()):
            matched1 = boxes[assign1.matched_index[take1][pos1]]
            reg1 = smooth_l1_reg(deltas1[pos1], encode_deltas(sampled1[pos1], matched1))
        else:
            reg1 = deltas1.sum() * 0.0

        # stage 2 trains on stage 1's refined boxes
        with torch.no_grad():
            refined = decode_deltas(sampled1, deltas1)
            refined = clip_boxes(refined, image_size[1], image_size[0])
            wide = (refined[:, 2] - refined[:, 0]) > 1.0
            tall = (refined[:, 3] - refined[:, 1]) > 1.0
            refined = refined[wide & tall]
        candidates = torch.cat([refined, boxes])
        assign2 = assign_targets(candidates, boxes, self.iou_threshold)
        take2 = _sample_balanced(assign2.labels, self.head_batch_size,
                                 self.positive_fraction, generator)
        sampled2 = candidates[take2]
        labels2 = assign2.labels[take2]
        matched2 = assign2.matched_index[take2]

        rois2 = roi_extract(feature_map, sampled2, self.roi_resolution, image_size)
        reid_raw, deltas2 = self.second_head(rois2)

        scene = self._scene_vectors(feature_map, sampled2.shape[0])
        exclude = [int(matched2[i]) if labels2[i] == 1 else None
                   for i in range(sampled2.shape[0])]
        group = self._group_vectors(feature_map, image_size, boxes, exclude)
        fused, scores2 = self.fusion(reid_raw, scene, group)

        cls2 = cls_loss_second(
            scores2,
            (labels2 == 1).to(scores2.dtype),
            weighted=self.cls_second_weighted,
        )
        pos2 = labels2 == 1
        if bool(pos2.any()):
            matched_boxes2 = boxes[matched2[pos2]]
            reg2 = smooth_l1_reg(deltas2[pos2], encode_deltas(sampled2[pos2], matched_boxes2))
            person_embeddings = fused[pos2]
            person_labels = identities[matched2[pos2]]
        else:
            reg2 = deltas2.sum() * 0.0
            person_embeddings = fused[:0]
            person_labels = identities[:0]

        return {
            "rpn_cls": rpn_losses["rpn_cls"],
            "rpn_reg": rpn_losses["rpn_reg"],
            "reg_first": reg1,
            "cls_first": cls1,
            "reg_second": reg2,
            "cls_second": cls2,
            "embeddings": person_embeddings,
            "reid_labels": person_labels,
        }

    # -------------------------------------------------------------- inference

    @torch.no_grad()
    def forward_infer(
        self,
        image: torch.Tensor,
        boxes: torch.Tensor | None = None,
        score_threshold: float = 0.0,
    ) -> list[PersonEmbedding]:
        """Detect and describe people in one [3, H, W] image.

        With boxes given, detection is skipped and embeddings are
        computed at exactly those boxes (the ground-truth-box protocol);
        the group context then pools over the given boxes themselves.
        """
        was_training = self.training
        self.eval()
        try:
            image_size = (image.shape[1], image.shape[2])
            feature_map = extract_backbone(self.backbone, image)
            if boxes is None:
                candidates = self._detect_candidates(feature_map, image_size)
                refine = True
            else:
                candidates = boxes.to(torch.float32)
                refine = False
            if candidates.shape[0] == 0:
                return []

            rois = roi_extract(feature_map, candidates, self.roi_resolution, image_size)
            reid_raw, deltas = self.second_head(rois)
            scene = self._scene_vectors(feature_map, candidates.shape[0])
            exclude = list(range(candidates.shape[0]))
            group = self._group_vectors(feature_map, image_size, candidates, exclude)
            fused, scores = self.fusion(reid_raw, scene, group)

            if refine:
                final_boxes = clip_boxes(decode_deltas(candidates, deltas),
                                         image_size[1], image_size[0])
                ok = ((final_boxes[:, 2] - final_boxes[:, 0]) > 1.0) & (
                    (final_boxes[:, 3] - final_boxes[:, 1]) > 1.0
                ) & (scores >= score_threshold)
                final_boxes, scores, fused = final_boxes[ok], scores[ok], fused[ok]
                if final_boxes.shape[0] == 0:
                    return []
                keep = nms_indices(final_boxes, scores, self.nms_second)
                final_boxes, scores, fused = final_boxes[keep], scores[keep], fused[keep]
            else:
                final_boxes = candidates

            return [
                PersonEmbedding(
                    box=tuple(final_boxes[i].tolist()),
                    score=float(scores[i]),
                    vector=fused[i].cpu().numpy(),
                )
                for i in range(final_boxes.shape[0])
            ]
        finally:
            self.train(was_training)

    def _detect_candidates(self, feature_map, image_size) -> torch.Tensor:
        """First head pass: refine proposals, then suppress duplicates."""
        rpn_out = self.rpn(feature_map, image_size)
        proposals = rpn_out.proposals
        if proposals.shape[0] == 0:
            return proposals
        rois = roi_extract(feature_map, proposals, self.roi_resolution, image_size)
        logits, deltas = self.first_head(rois)
        scores = torch.softmax(logits, dim=1)[:, 1]
        refined = clip_boxes(decode_deltas(proposals, deltas),
                             image_size[1], image_size[0])
        ok = ((refined[:, 2] - refined[:, 0]) > 1.0) & ((refined[:, 3] - refined[:, 1]) > 1.0)
        refined, scores = refined[ok], scores[ok]
        if refined.shape[0] == 0:
            return refined
        keep = nms_indices(refined, scores, self.nms_first)[: self.max_candidates]
        return refined[keep]
