"""Versioned checkpoints carrying everything a resume needs."""

from __future__ import annotations

from pathlib import Path

import torch

from ctxsearch.engine.config import TrainConfig
from ctxsearch.errors import ConfigurationError

SCHEMA_VERSION = 1
KIND = "ctxsearch-checkpoint"


def save_checkpoint(path, *, model, optimizer, oim, config: TrainConfig, step: int,
                    extra: dict | None = None) -> None:
    payload = {
        "schema_version": SCHEMA_VERSION,
        "kind": KIND,
        "step": int(step),
        "config": config.to_dict(),
        "model": model.state_dict(),
        "optimizer": optimizer.state_dict() if optimizer is not None else None,
        "oim": oim.state_dict() if oim is not None else None,
        "extra": extra or {},
    }
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    tmp = path.with_suffix(path.suffix + ".tmp")
    torch.save(payload, tmp)
    tmp.replace(path)


def load_checkpoint(path) -> dict:
    payload = torch.load(path, map_location="cpu", weights_only=False)
    if not isinstance(payload, dict) or payload.get("kind") != KIND:
        raise ConfigurationError(f"{path}: not a checkpoint file")
    if payload.get("schema_version") != SCHEMA_VERSION:
        raise ConfigurationError(
            f"{path}: schema version {payload.get('schema_version')} not supported"
        )
    return payload
