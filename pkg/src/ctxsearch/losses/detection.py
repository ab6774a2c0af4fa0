"""Detection losses for the two refinement stages."""

from __future__ import annotations

import warnings

import torch

from ctxsearch.errors import DegenerateInputWarning

_EPS = 1e-12


def _smooth_l1(x: torch.Tensor) -> torch.Tensor:
    absx = x.abs()
    return torch.where(absx < 1.0, 0.5 * x * x, absx - 0.5)


def smooth_l1_reg(pred: torch.Tensor, target: torch.Tensor) -> torch.Tensor:
    """Smooth-L1 box regression loss.

    pred and target hold regression outputs for the positive samples
    only ([P, 4] offsets, or any matching shapes).  The loss sums over
    coordinates and averages over positives.  With no positives the
    loss is zero by convention (and a warning is raised, since a whole
    batch without a single person usually means broken sampling).
    """
    if pred.shape != target.shape:
        raise ValueError(f"shape mismatch: {tuple(pred.shape)} vs {tuple(target.shape)}")
    num_pos = pred.shape[0] if pred.dim() > 0 else int(pred.numel() > 0)
    if num_pos == 0:
        warnings.warn(
            "no positive samples for box regression; returning zero loss",
            DegenerateInputWarning,
            stacklevel=2,
        )
        return pred.sum() * 0.0
    per_sample = _smooth_l1(pred - target).reshape(num_pos, -1).sum(dim=1)
    return per_sample.mean()


def cls_loss_first(probs: torch.Tensor, targets: torch.Tensor) -> torch.Tensor:
    """Mean cross-entropy over all sampled proposals.

    probs: [N, K] class probabilities (rows sum to 1) with integer
    targets, or [N] person probabilities with 0/1 targets.
    """
    if probs.dim() == 1:
        probs = torch.stack([1.0 - probs, probs], dim=1)
    if probs.dim() != 2:
        raise ValueError(f"expected [N, K] or [N] probabilities, got shape {tuple(probs.shape)}")
    if probs.shape[0] == 0:
        return probs.sum() * 0.0
    targets = targets.long()
    if targets.min() < 0 or targets.max() >= probs.shape[1]:
        raise ValueError("class target out of range")
    picked = probs.gather(1, targets.unsqueeze(1)).squeeze(1)
    return -(picked.clamp(min=_EPS).log()).mean()


def cls_loss_second(
    scores: torch.Tensor, targets: torch.Tensor, *, weighted: bool = True
) -> torch.Tensor:
    """Classification loss on the norm-derived person scores.

    scores: [N] person probabilities in (0, 1); targets: 0/1.

    weighted=True uses the target-weighted form (1/N) * sum(t_i *
    -log s_i): background samples contribute nothing, so the stage is
    supervised only through the positives.  weighted=False is the
    conventional binary cross-entropy over all samples.
    """
    if scores.shape != targets.shape:
        raise ValueError(f"shape mismatch: {tuple(scores.shape)} vs {tuple(targets.shape)}")
    if scores.numel() == 0:
        return scores.sum() * 0.0
    t = targets.to(scores.dtype)
    pos_term = -t * scores.clamp(min=_EPS).log()
    if weighted:
        return pos_term.mean()
    neg_term = -(1.0 - t) * (1.0 - scores).clamp(min=_EPS).log()
    return (pos_term + neg_term).mean()
