"""Training configuration.

Defaults reproduce the reference recipe: batches of 5 images resized
into the 900x1500 range, 18 epochs of SGD at 0.003 with momentum 0.9
and weight decay 5e-4, a linear warmup across the first epoch and a
x0.1 decay from epoch 16 on, IoU threshold 0.5 for both heads, test
NMS thresholds (0.4, 0.5), and a re-ID queue sized per dataset.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field
from pathlib import Path

import yaml

from ctxsearch.errors import ConfigurationError
from ctxsearch.losses.total import LossWeights

SCHEMA_VERSION = 1
KIND = "ctxsearch-config"

QUEUE_SIZES = {
    "cuhk-sysu": 5000,
    "prw": 500,
    "movienet-cs": 2000,
    "synthetic": 64,
}

_PROFILES = ("resnet50", "toy")
_VARIANTS = ("implicit", "explicit")


@dataclass
class TrainConfig:
    dataset: str = "cuhk-sysu"
    backbone_profile: str = "resnet50"
    batch_size: int = 5
    resize_min: int | None = 900
    resize_max: int | None = 1500
    epochs: int = 18
    total_steps: int | None = None  # overrides epochs * steps_per_epoch when set
    base_lr: float = 0.003
    warmup_epochs: float = 1.0
    decay_epoch: int = 16  # 1-based epoch at which lr drops
    decay_factor: float = 0.1
    momentum: float = 0.9
    weight_decay: float = 5e-4
    grad_clip: float = 10.0
    iou_threshold: float = 0.5
    nms_first: float = 0.4
    nms_second: float = 0.5
    fusion_variant: str = "implicit"
    use_scene_context: bool = True
    use_group_context: bool = True
    se_reduction: int = 16
    queue_size: int | None = None  # None -> QUEUE_SIZES[dataset]
    oim_momentum: float = 0.5
    oim_temperature: float = 1.0 / 30.0
    loss_weights: LossWeights = field(default_factory=LossWeights)
    horizontal_flip: bool = True
    head_batch_size: int = 128
    max_candidates: int = 128
    cls_second_weighted: bool = True
    score_threshold: float = 0.0
    seed: int = 0
    weights_path: str | None = None
    toy_channels: int = 128

    def __post_init__(self):
        if self.backbone_profile not in _PROFILES:
            raise ConfigurationError(
                f"backbone_profile must be one of {_PROFILES}, got {self.backbone_profile!r}"
            )
        if self.fusion_variant not in _VARIANTS:
            raise ConfigurationError(
                f"fusion_variant must be one of {_VARIANTS}, got {self.fusion_variant!r}"
            )
        if self.batch_size < 1:
            raise ConfigurationError(f"batch_size must be >= 1, got {self.batch_size}")
        if self.epochs < 1:
            raise ConfigurationError(f"epochs must be >= 1, got {self.epochs}")
        if self.total_steps is not None and self.total_steps < 1:
            raise ConfigurationError(f"total_steps must be >= 1, got {self.total_steps}")
        if self.base_lr <= 0:
            raise ConfigurationError(f"base_lr must be positive, got {self.base_lr}")
        if self.warmup_epochs < 0:
            raise ConfigurationError(f"warmup_epochs must be >= 0, got {self.warmup_epochs}")
        if self.decay_epoch < 1:
            raise ConfigurationError(f"decay_epoch must be >= 1, got {self.decay_epoch}")
        if not 0 < self.decay_factor <= 1:
            raise ConfigurationError(f"decay_factor must be in (0, 1], got {self.decay_factor}")
        for name in ("iou_threshold", "nms_first", "nms_second"):
            value = getattr(self, name)
            if not 0 < value < 1:
                raise ConfigurationError(f"{name} must be in (0, 1), got {value}")
        if (self.resize_min is None) != (self.resize_max is None):
            raise ConfigurationError("resize_min and resize_max must be set together")
        if self.resize_min is not None and self.resize_min > self.resize_max:
            raise ConfigurationError("resize_min must not exceed resize_max")
        if isinstance(self.loss_weights, dict):
            self.loss_weights = LossWeights(**self.loss_weights)

    def resolved_queue_size(self) -> int:
        if self.queue_size is not None:
            return self.queue_size
        try:
            return QUEUE_SIZES[self.dataset]
        except KeyError:
            raise ConfigurationError(
                f"no default queue size for dataset {self.dataset!r}; set queue_size"
            ) from None

    @classmethod
    def toy_profile(cls, **overrides) -> "TrainConfig":
        """Desk-scale profile: small backbone, synthetic data, minutes not days."""
        base = dict(
            dataset="synthetic",
            backbone_profile="toy",
            batch_size=4,
            resize_min=None,
            resize_max=None,
            epochs=8,
            total_steps=300,
            base_lr=0.02,
            warmup_epochs=0.1,
            decay_epoch=7,
            momentum=0.9,
            weight_decay=1e-4,
            head_batch_size=24,
            max_candidates=64,
        )
        base.update(overrides)
        return cls(**base)

    def to_dict(self) -> dict:
        out = dataclasses.asdict(self)
        out["loss_weights"] = self.loss_weights.as_dict()
        return out

    @classmethod
    def from_dict(cls, data: dict) -> "TrainConfig":
        known = {f.name for f in dataclasses.fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ConfigurationError(f"unknown config keys: {sorted(unknown)}")
        payload = dict(data)
        if isinstance(payload.get("loss_weights"), dict):
            payload["loss_weights"] = LossWeights(**payload["loss_weights"])
        return cls(**payload)


def save_config(config: TrainConfig, path) -> None:
    payload = {"schema_version": SCHEMA_VERSION, "kind": KIND, "config": config.to_dict()}
    Path(path).write_text(yaml.safe_dump(payload, sort_keys=True))


def load_config(path) -> TrainConfig:
    try:
        data = yaml.safe_load(Path(path).read_text())
    except yaml.YAMLError as exc:
        raise ConfigurationError(f"{path}: invalid YAML ({exc})") from exc
    if not isinstance(data, dict) or data.get("kind") != KIND:
        raise ConfigurationError(f"{path}: not a training config file")
    if data.get("schema_version") != SCHEMA_VERSION:
        raise ConfigurationError(
            f"{path}: schema version {data.get('schema_version')} not supported"
        )
    return TrainConfig.from_dict(data.get("config", {}))
