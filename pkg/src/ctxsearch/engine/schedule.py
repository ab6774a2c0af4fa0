"""Learning-rate schedule: linear warmup, then a single step decay."""

from __future__ import annotations

from ctxsearch.engine.config import TrainConfig


def lr_for_epoch(config: TrainConfig, epoch: int) -> float:
    """Post-warmup learning rate for a 1-based epoch number."""
    if epoch < 1:
        raise ValueError(f"epoch is 1-based, got {epoch}")
    lr = config.base_lr
    if epoch >= config.decay_epoch:
        lr *= config.decay_factor
    return lr


def lr_at(config: TrainConfig, step: int, steps_per_epoch: int) -> float:
    """Learning rate for a 0-based global step.

    Ramps linearly to base_lr across the warmup epochs (reaching it on
    the last warmup step), then follows the per-epoch schedule.
    """
    if step < 0:
        raise ValueError(f"step must be >= 0, got {step}")
    if steps_per_epoch < 1:
        raise ValueError(f"steps_per_epoch must be >= 1, got {steps_per_epoch}")
    warm_steps = int(round(config.warmup_epochs * steps_per_epoch))
    if step < warm_steps:
        return config.base_lr * (step + 1) / warm_steps
    epoch = step // steps_per_epoch + 1
    return lr_for_epoch(config, epoch)
