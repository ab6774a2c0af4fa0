"""Fusion heads that merge appearance with scene and group context.

Two variants:

* implicit -- concatenate the raw 256-d appearance feature with the
  enabled 128-d context vectors, gate the channels, then split the
  result into a unit embedding and a detection score with one
  norm-aware embedding.

* explicit -- give each stream its own norm-aware embedding, gate the
  concatenated unit directions, and renormalize.  The detection score
  comes from the appearance stream alone, so context can never veto a
  confident detection.

With both context streams disabled either head degenerates to the
plain norm-aware appearance embedding (dimension 256, no gating).
"""

from __future__ import annotations

import torch
from torch import nn

from ctxsearch.context.attention import ChannelGate
from ctxsearch.context.nae import NormAwareEmbedding, _EPS
from ctxsearch.context.types import CONTEXT_DIM

REID_DIM = 256


def embedding_dim(use_scene: bool, use_group: bool) -> int:
    return REID_DIM + CONTEXT_DIM * (int(use_scene) + int(use_group))


class _FusionBase(nn.Module):
    def __init__(self, use_scene: bool, use_group: bool, se_reduction: int = 16):
        super().__init__()
        self.use_scene = bool(use_scene)
        self.use_group = bool(use_group)
        self.out_dim = embedding_dim(use_scene, use_group)
        self.gate = (
            ChannelGate(self.out_dim, se_reduction) if (use_scene or use_group) else None
        )

    def _check(self, reid, scene, group):
        if reid.dim() != 2 or reid.shape[1] != REID_DIM:
            raise ValueError(f"expected [N, {REID_DIM}] appearance features, got {tuple(reid.shape)}")
        if self.use_scene:
            if scene is None or scene.shape != (reid.shape[0], CONTEXT_DIM):
                raise ValueError("scene context enabled but features missing or mis-shaped")
        if self.use_group:
            if group is None or group.shape != (reid.shape[0], CONTEXT_DIM):
                raise ValueError("group context enabled but features missing or mis-shaped")


class ImplicitFusionHead(_FusionBase):
    def __init__(self, use_scene: bool = True, use_group: bool = True, se_reduction: int = 16):
        super().__init__(use_scene, use_group, se_reduction)
        self.nae = NormAwareEmbedding()

    def forward(self, reid, scene=None, group=None):
        self._check(reid, scene, group)
        parts = [reid]
        if self.use_scene:
            parts.append(scene)
        if self.use_group:
            parts.append(group)
        if self.gate is None:
            fused = reid
        else:
            fused = self.gate(torch.cat(parts, dim=1))
        return self.nae(fused, allow_zero=True)


class ExplicitFusionHead(_FusionBase):
    def __init__(self, use_scene: bool = True, use_group: bool = True, se_reduction: int = 16):
        super().__init__(use_scene, use_group, se_reduction)
        self.nae_reid = NormAwareEmbedding()
        self.nae_scene = NormAwareEmbedding() if use_scene else None
        self.nae_group = NormAwareEmbedding() if use_group else None

    def forward(self, reid, scene=None, group=None):
        self._check(reid, scene, group)
        unit_reid, score = self.nae_reid(reid, allow_zero=True)
        if self.gate is None:
            return unit_reid, score
        parts = [unit_reid]
        if self.use_scene:
            unit_scene, _ = self.nae_scene(scene, allow_zero=True)
            parts.append(unit_scene)
        if self.use_group:
            unit_group, _ = self.nae_group(group, allow_zero=True)
            parts.append(unit_group)
        fused = self.gate(torch.cat(parts, dim=1))
        norm = fused.norm(dim=1, keepdim=True).clamp(min=_EPS)
        return fused / norm, score


def build_fusion_head(
    variant: str, use_scene: bool = True, use_group: bool = True, se_reduction: int = 16
):
    if variant == "implicit":
        return ImplicitFusionHead(use_scene, use_group, se_reduction)
    if variant == "explicit":
        return ExplicitFusionHead(use_scene, use_group, se_reduction)
    raise ValueError(f"unknown fusion variant {variant!r} (expected 'implicit' or 'explicit')")
