"""Channel attention over concatenated feature vectors."""

from __future__ import annotations

import torch
from torch import nn


class ChannelGate(nn.Module):
    """Squeeze-and-excitation style gate for flat feature vectors.

    gate = sigmoid(W2 . relu(W1 . x)), output = x * gate.  Gates live
    strictly inside (0, 1), so no channel is ever fully zeroed or
    passed through untouched.
    """

    def __init__(self, dim: int, reduction: int = 16):
        super().__init__()
        if dim <= 0:
            raise ValueError(f"dim must be positive, got {dim}")
        if reduction <= 0:
            raise ValueError(f"reduction must be positive, got {reduction}")
        hidden = max(1, dim // reduction)
        self.fc1 = nn.Linear(dim, hidden)
        self.fc2 = nn.Linear(hidden, dim)
        self.dim = dim

    def gate(self, x: torch.Tensor) -> torch.Tensor:
        return torch.sigmoid(self.fc2(torch.relu(self.fc1(x))))

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        if x.shape[-1] != self.dim:
            raise ValueError(f"expected last dimension {self.dim}, got {x.shape[-1]}")
        return x * self.gate(x)


def se_attention(module: ChannelGate, x: torch.Tensor) -> torch.Tensor:
    """Functional wrapper used by the reweighting tests."""
    return module(x)
