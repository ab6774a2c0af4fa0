"""The two sequential refinement heads.

The first head classifies person-vs-background and refines the
proposals; its surviving boxes are re-pooled and fed to the second
head, which produces the 256-d appearance feature and a final box
refinement.  The second head has no classification layer of its own:
the person score at that stage comes from the feature norm via the
norm-aware embedding in the fusion head.
"""

from __future__ import annotations

import torch
from torch import nn


class FirstHead(nn.Module):
    def __init__(self, box_head: nn.Module):
        super().__init__()
        self.box_head = box_head
        dim = box_head.out_dim
        self.cls = nn.Linear(dim, 2)
        self.reg = nn.Linear(dim, 4)
        nn.init.normal_(self.cls.weight, std=0.01)
        nn.init.normal_(self.reg.weight, std=0.001)
        nn.init.constant_(self.cls.bias, 0.0)
        nn.init.constant_(self.reg.bias, 0.0)

    def forward(self, region_features: torch.Tensor) -> tuple[torch.Tensor, torch.Tensor]:
        """[N, C, r, r] pooled regions -> ([N, 2] class logits, [N, 4] deltas)."""
        feats = self.box_head(region_features)
        return self.cls(feats), self.reg(feats)


class SecondHead(nn.Module):
    def __init__(self, box_head: nn.Module, reid_dim: int = 256):
        super().__init__()
        self.box_head = box_head
        dim = box_head.out_dim
        self.reid = nn.Linear(dim, reid_dim)
        self.reg = nn.Linear(dim, 4)
        nn.init.normal_(self.reid.weight, std=0.01)
        nn.init.normal_(self.reg.weight, std=0.001)
        nn.init.constant_(self.reid.bias, 0.0)
        nn.init.constant_(self.reg.bias, 0.0)
        self.reid_dim = reid_dim

    def forward(self, region_features: torch.Tensor) -> tuple[torch.Tensor, torch.Tensor]:
        """[N, C, r, r] pooled regions -> ([N, 256] appearance, [N, 4] deltas)."""
        feats = self.box_head(region_features)
        return self.reid(feats), self.reg(feats)
