"""Context encoders.

Both context branches share one encoder design: two 1x1 convolutions
(with a ReLU between them) followed by adaptive max pooling down to a
single vector.  The scene branch runs it over the whole backbone
feature map; the group branch runs it over each person's pooled region
features and then takes an element-wise max across the *other* people
in the image.
"""

from __future__ import annotations

import torch
from torch import nn

from ctxsearch.context.types import CONTEXT_DIM


class ContextEncoder(nn.Module):
    """1x1 conv -> ReLU -> 1x1 conv -> adaptive max pool.

    The projection starts near zero: a context stream contributes
    almost nothing to the fused embedding until training finds it
    useful, so an uninformative stream cannot drown out appearance.
    """

    def __init__(self, in_channels: int, out_dim: int = CONTEXT_DIM, mid_channels: int | None = None):
        super().__init__()
        if mid_channels is None:
            mid_channels = max(out_dim, in_channels // 2)
        self.reduce = nn.Conv2d(in_channels, mid_channels, kernel_size=1)
        self.project = nn.Conv2d(mid_channels, out_dim, kernel_size=1)
        nn.init.normal_(self.project.weight, std=0.01)
        nn.init.constant_(self.project.bias, 0.0)
        self.pool = nn.AdaptiveMaxPool2d(1)
        self.out_dim = out_dim

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        if x.dim() != 4:
            raise ValueError(f"expected [N, C, H, W] input, got shape {tuple(x.shape)}")
        x = self.project(torch.relu(self.reduce(x)))
        return self.pool(x).flatten(1)


def gsc_encode(encoder: ContextEncoder, feature_map: torch.Tensor) -> torch.Tensor:
    """Pool one scene vector from a [C, H, W] backbone feature map."""
    if feature_map.dim() != 3:
        raise ValueError(f"expected [C, H, W] feature map, got shape {tuple(feature_map.shape)}")
    return encoder(feature_map.unsqueeze(0)).squeeze(0)


def neighbor_max(encoded: torch.Tensor, target_index: int) -> torch.Tensor:
    """Element-wise max over all rows except target_index.

    Returns a zero vector when the target has no neighbors.
    """
    n, dim = encoded.shape
    if not 0 <= target_index < n:
        raise IndexError(f"target_index {target_index} out of range for {n} people")
    if n == 1:
        return encoded.new_zeros(dim)
    keep = torch.ones(n, dtype=torch.bool, device=encoded.device)
    keep[target_index] = False
    return encoded[keep].amax(dim=0)


def lgc_encode(
    encoder: ContextEncoder,
    person_features: torch.Tensor,
    target_index: int,
) -> torch.Tensor:
    """Group-context vector for one person.

    person_features holds the pooled region features of every person in
    the image ([N, C, r, r], target included).  The target's own
    features are excluded from the max so the vector describes only the
    company they keep.
    """
    if person_features.dim() != 4:
        raise ValueError(
            f"expected [N, C, r, r] person features, got shape {tuple(person_features.shape)}"
        )
    n = person_features.shape[0]
    if not 0 <= target_index < n:
        raise IndexError(f"target_index {target_index} out of range for {n} people")
    if n == 1:
        return person_features.new_zeros(encoder.out_dim)
    encoded = encoder(person_features)
    return neighbor_max(encoded, target_index)
