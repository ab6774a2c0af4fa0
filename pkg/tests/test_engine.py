"""Training-loop reproducibility and bookkeeping."""

import json

import pytest
import torch

from ctxsearch.data.types import DatasetIndex
from ctxsearch.engine.config import TrainConfig
from ctxsearch.engine.schedule import lr_at
from ctxsearch.engine.trainer import Trainer
from ctxsearch.errors import ConfigurationError

from conftest import relabel_as_test


def _config(**overrides):
    overrides.setdefault("queue_size", 16)
    overrides.setdefault("seed", 3)
    overrides.setdefault("total_steps", 6)
    return TrainConfig.toy_profile(**overrides)


def test_fresh_runs_are_identical(tiny_pair):
    train, _ = tiny_pair
    first = Trainer(_config(), train).run()
    second = Trainer(_config(), train).run()
    assert len(first) == len(second) == 6
    for a, b in zip(first, second):
        assert a == b  # exact float equality, field by field


def test_resume_continues_bit_for_bit(tiny_pair, tmp_path):
    train, _ = tiny_pair
    reference = Trainer(_config(), train).run()

    half = Trainer(_config(), train)
    half.run(steps=3)
    half.save(tmp_path / "mid.ckpt")
    resumed = Trainer.resume(tmp_path / "mid.ckpt", train)
    assert resumed.step == 3
    tail = resumed.run(steps=3)
    assert tail == reference[3:]


def test_lr_reaches_optimizer(tiny_pair):
    train, _ = tiny_pair
    trainer = Trainer(_config(), train)
    record = trainer.train_step()
    expected = lr_at(trainer.config, 0, trainer.steps_per_epoch)
    assert record["lr"] == expected
    assert trainer.optimizer.param_groups[0]["lr"] == expected


def test_rejects_non_train_split(tiny_pair):
    train, _ = tiny_pair
    with pytest.raises(ConfigurationError, match="train split"):
        Trainer(_config(), relabel_as_test(train))


def test_rejects_empty_index():
    empty = DatasetIndex(name="x", split="train", images=[],
                         annotations=[], identities=[])
    with pytest.raises(ConfigurationError, match="no images"):
        Trainer(_config(), empty)


def test_memory_bank_updates_even_without_reid_weight(tiny_pair):
    train, _ = tiny_pair
    weights = {"reg_first": 1.0, "cls_first": 1.0, "reg_second": 1.0,
               "cls_second": 1.0, "reid": 0.0}
    trainer = Trainer(_config(total_steps=3, loss_weights=weights), train)
    assert not bool(trainer.oim.lut_filled.any())
    trainer.run()
    assert bool(trainer.oim.lut_filled.any())


def test_work_dir_artifacts(tiny_pair, tmp_path):
    train, _ = tiny_pair
    trainer = Trainer(_config(total_steps=2), train, tmp_path / "run")
    records = trainer.run()
    lines = (tmp_path / "run" / "losses.jsonl").read_text().splitlines()
    assert len(lines) == 2
    assert [json.loads(line) for line in lines] == records
    assert (tmp_path / "run" / "last.ckpt").is_file()


def test_step_record_contents(tiny_pair):
    train, _ = tiny_pair
    record = Trainer(_config(), train).train_step()
    expected_keys = {"step", "lr", "total", "reg_first", "cls_first",
                     "reg_second", "cls_second", "reid", "rpn_cls", "rpn_reg"}
    assert set(record) == expected_keys
    assert record["step"] == 0
    for key in expected_keys - {"step"}:
        assert torch.isfinite(torch.tensor(record[key]))
