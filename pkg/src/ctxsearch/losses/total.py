"""Weighted sum of the five training loss components."""

from __future__ import annotations

import math
from dataclasses import dataclass

import torch

from ctxsearch.errors import TrainingDivergenceError

COMPONENT_NAMES = ("reg_first", "cls_first", "reg_second", "cls_second", "reid")


@dataclass(frozen=True)
class LossWeights:
    reg_first: float = 10.0
    cls_first: float = 1.0
    reg_second: float = 1.0
    cls_second: float = 1.0
    reid: float = 1.0

    def __post_init__(self):
        for name in COMPONENT_NAMES:
            value = getattr(self, name)
            if not math.isfinite(value) or value < 0:
                raise ValueError(f"weight {name} must be finite and >= 0, got {value}")

    def as_dict(self) -> dict[str, float]:
        return {name: float(getattr(self, name)) for name in COMPONENT_NAMES}


def total_loss(components: dict, weights: LossWeights | None = None) -> torch.Tensor:
    """Combine the five components into one scalar.

    components maps each name in COMPONENT_NAMES to a scalar tensor.
    Any non-finite component aborts with an error naming the offender,
    so a diverging run fails loudly instead of silently optimizing NaN.
    """
    if weights is None:
        weights = LossWeights()
    missing = [name for name in COMPONENT_NAMES if name not in components]
    if missing:
        raise ValueError(f"missing loss components: {missing}")
    total = None
    for name in COMPONENT_NAMES:
        value = components[name]
        if not torch.is_tensor(value):
            value = torch.as_tensor(float(value))
        if not bool(torch.isfinite(value.detach()).all()):
            raise TrainingDivergenceError(f"loss component {name!r} is non-finite")
        term = getattr(weights, name) * value
        total = term if total is None else total + term
    return total
