"""Training loop.

Batch composition, augmentation and head sampling are all driven by
RNG streams derived from (seed, step), so any step can be reproduced in
isolation and a resumed run continues bit-for-bit where it left off.
"""

from __future__ import annotations

import json
import math
from pathlib import Path

import numpy as np
import torch

from ctxsearch.data.types import DatasetIndex, UNLABELED
from ctxsearch.engine.augment import maybe_flip
from ctxsearch.engine.checkpoint import load_checkpoint, save_checkpoint
from ctxsearch.engine.config import TrainConfig
from ctxsearch.engine.schedule import lr_at
from ctxsearch.engine.transforms import resize_to_range, to_input_tensor
from ctxsearch.errors import ConfigurationError
from ctxsearch.losses.oim import OimState, oim_loss, oim_update
from ctxsearch.losses.total import total_loss
from ctxsearch.model import PersonSearchModel


def build_model(config: TrainConfig) -> PersonSearchModel:
    return PersonSearchModel(
        config.backbone_profile,
        fusion_variant=config.fusion_variant,
        use_scene_context=config.use_scene_context,
        use_group_context=config.use_group_context,
        se_reduction=config.se_reduction,
        iou_threshold=config.iou_threshold,
        nms_first=config.nms_first,
        nms_second=config.nms_second,
        head_batch_size=config.head_batch_size,
        max_candidates=config.max_candidates,
        cls_second_weighted=config.cls_second_weighted,
        weights_path=config.weights_path,
        toy_channels=config.toy_channels,
    )


class Trainer:
    def __init__(self, config: TrainConfig, train_index: DatasetIndex,
                 work_dir: str | Path | None = None):
        if train_index.split != "train":
            raise ConfigurationError("trainer needs the train split")
        if not train_index.images:
            raise ConfigurationError("train split contains no images")
        self.config = config
        self.index = train_index
        self.work_dir = Path(work_dir) if work_dir is not None else None
        if self.work_dir is not None:
            self.work_dir.mkdir(parents=True, exist_ok=True)

        torch.manual_seed(config.seed)
        self.model = build_model(config)
        self.oim = OimState(
            max(1, train_index.num_identities),
            self.model.embedding_dim,
            config.resolved_queue_size(),
            temperature=config.oim_temperature,
            momentum=config.oim_momentum,
        )
        params = [p for p in self.model.parameters() if p.requires_grad]
        self.optimizer = torch.optim.SGD(
            params, lr=config.base_lr, momentum=config.momentum,
            weight_decay=config.weight_decay,
        )
        self.steps_per_epoch = max(1, math.ceil(len(train_index) / config.batch_size))
        self.total_steps = config.total_steps or config.epochs * self.steps_per_epoch
        self.step = 0
        self.history: list[dict] = []

    # ------------------------------------------------------------------ data

    def _load_batch(self, step: int):
        rng = np.random.default_rng([self.config.seed, step])
        count = len(self.index.images)
        take = rng.choice(count, size=self.config.batch_size,
                          replace=count < self.config.batch_size)
        images, boxes, identities = [], [], []
        for idx in take:
            sample = self.index.images[int(idx)]
            anns = self.index.boxes_for(sample.image_id)
            image = to_input_tensor(sample.pixels)
            gt = torch.tensor([a.box for a in anns], dtype=torch.float32).reshape(-1, 4)
            labels = torch.tensor(
                [self.index.label_of(a.identity) if a.labeled else UNLABELED for a in anns],
                dtype=torch.long,
            )
            image, gt, _ = resize_to_range(
                image, gt, self.config.resize_min, self.config.resize_max
            )
            if self.config.horizontal_flip:
                image, gt, _ = maybe_flip(image, gt, rng)
            images.append(image)
            boxes.append(gt)
            identities.append(labels)
        return images, boxes, identities

    # ------------------------------------------------------------------ steps

    def train_step(self) -> dict:
        step = self.step
        lr = lr_at(self.config, step, self.steps_per_epoch)
        for group in self.optimizer.param_groups:
            group["lr"] = lr

        images, boxes, identities = self._load_batch(step)
        generator = torch.Generator()
        generator.manual_seed(
            int(np.random.default_rng([self.config.seed, step, 1]).integers(2**62))
        )
        self.model.train()
        out = self.model.forward_train(images, boxes, identities, generator)
        components = {
            "reg_first": out["reg_first"],
            "cls_first": out["cls_first"],
            "reg_second": out["reg_second"],
            "cls_second": out["cls_second"],
            "reid": oim_loss(out["embeddings"], out["reid_labels"], self.oim),
        }
        loss = total_loss(components, self.config.loss_weights)
        loss = loss + out["rpn_cls"] + out["rpn_reg"]

        self.optimizer.zero_grad()
        loss.backward()
        if self.config.grad_clip > 0:
            torch.nn.utils.clip_grad_norm_(
                [p for p in self.model.parameters() if p.requires_grad],
                self.config.grad_clip,
            )
        self.optimizer.step()
        oim_update(self.oim, out["embeddings"].detach(), out["reid_labels"])
        self.step += 1

        record = {"step": step, "lr": lr, "total": float(loss.detach())}
        for key in ("reg_first", "cls_first", "reg_second", "cls_second", "reid"):
            record[key] = float(components[key].detach())
        record["rpn_cls"] = float(out["rpn_cls"].detach())
        record["rpn_reg"] = float(out["rpn_reg"].detach())
        self.history.append(record)
        if self.work_dir is not None:
            with open(self.work_dir / "losses.jsonl", "a") as fh:
                fh.write(json.dumps(record) + "\n")
        return record

    def run(self, steps: int | None = None, checkpoint_every: int | None = None,
            callback=None) -> list[dict]:
        """Train for the given number of steps (default: the full plan)."""
        target = self.total_steps if steps is None else self.step + steps
        while self.step < target:
            record = self.train_step()
            if callback is not None:
                callback(record)
            if (
                checkpoint_every
                and self.work_dir is not None
                and self.step % checkpoint_every == 0
            ):
                self.save(self.work_dir / "last.ckpt")
        if self.work_dir is not None:
            self.save(self.work_dir / "last.ckpt")
        return self.history

    # ------------------------------------------------------------ persistence

    def save(self, path) -> None:
        save_checkpoint(
            path,
            model=self.model,
            optimizer=self.optimizer,
            oim=self.oim,
            config=self.config,
            step=self.step,
        )

    @classmethod
    def resume(cls, path, train_index: DatasetIndex,
               work_dir: str | Path | None = None) -> "Trainer":
        payload = load_checkpoint(path)
        config = TrainConfig.from_dict(payload["config"])
        trainer = cls(config, train_index, work_dir)
        trainer.model.load_state_dict(payload["model"])
        if payload["optimizer"] is not None:
            trainer.optimizer.load_state_dict(payload["optimizer"])
        if payload["oim"] is not None:
            trainer.oim.load_state_dict(payload["oim"])
        trainer.step = payload["step"]
        return trainer
