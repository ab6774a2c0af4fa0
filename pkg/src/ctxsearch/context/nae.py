"""Norm-aware embedding.

Splits a feature vector into a unit direction (used for matching) and a
detection score derived from the vector's norm through a learnable
affine map and a sigmoid.  Works on single vectors without batch
statistics, so single-box inference behaves identically to batched
inference.
"""

from __future__ import annotations

import warnings

import torch
from torch import nn

from ctxsearch.errors import DegenerateInputWarning

_EPS = 1e-12


class NormAwareEmbedding(nn.Module):
    def __init__(self):
        super().__init__()
        self.scale = nn.Parameter(torch.ones(()))
        self.shift = nn.Parameter(torch.zeros(()))

    def forward(
        self, x: torch.Tensor, *, allow_zero: bool = False
    ) -> tuple[torch.Tensor, torch.Tensor]:
        """Return (unit_direction, score) for [N, d] or [d] input.

        Zero vectors have no direction; they trigger a warning and fall
        back to an epsilon-floored division (which returns the zero
        vector) unless allow_zero is set by a caller for whom zero is a
        legitimate sentinel (e.g. a person with no co-travelers).
        """
        single = x.dim() == 1
        flat = x.unsqueeze(0) if single else x
        if flat.dim() != 2:
            raise ValueError(f"expected [N, d] or [d] input, got shape {tuple(x.shape)}")
        norm = flat.norm(dim=1)
        if not allow_zero and bool((norm <= _EPS).any()):
            warnings.warn(
                "norm-aware embedding received a (near-)zero vector; "
                "direction is undefined and was epsilon-floored",
                DegenerateInputWarning,
                stacklevel=2,
            )
        unit = flat / norm.clamp(min=_EPS).unsqueeze(1)
        score = torch.sigmoid(self.scale * norm + self.shift)
        if single:
            return unit.squeeze(0), score.squeeze(0)
        return unit, score


def nae_embed(module: NormAwareEmbedding, x: torch.Tensor) -> tuple[torch.Tensor, torch.Tensor]:
    return module(x)
