import pytest

from ctxsearch.engine.config import (
    QUEUE_SIZES,
    TrainConfig,
    load_config,
    save_config,
)
from ctxsearch.errors import ConfigurationError


def test_reference_recipe_defaults():
    c = TrainConfig()
    assert c.base_lr == 0.003
    assert c.batch_size == 5
    assert c.epochs == 18
    assert c.decay_epoch == 16
    assert c.momentum == 0.9
    assert c.weight_decay == 5e-4
    assert (c.resize_min, c.resize_max) == (900, 1500)
    assert c.iou_threshold == 0.5
    assert (c.nms_first, c.nms_second) == (0.4, 0.5)
    assert c.warmup_epochs == 1.0
    assert c.decay_factor == 0.1
    assert c.loss_weights.reg_first == 10.0
    assert c.loss_weights.cls_first == 1.0
    assert c.loss_weights.reg_second == 1.0
    assert c.loss_weights.cls_second == 1.0
    assert c.loss_weights.reid == 1.0


def test_per_dataset_queue_sizes():
    assert QUEUE_SIZES["cuhk-sysu"] == 5000
    assert QUEUE_SIZES["prw"] == 500
    assert QUEUE_SIZES["movienet-cs"] == 2000
    assert TrainConfig(dataset="cuhk-sysu").resolved_queue_size() == 5000
    assert TrainConfig(dataset="prw").resolved_queue_size() == 500
    assert TrainConfig(dataset="movienet-cs").resolved_queue_size() == 2000


def test_explicit_queue_size_wins():
    assert TrainConfig(dataset="prw", queue_size=77).resolved_queue_size() == 77


def test_unknown_dataset_needs_queue_size():
    config = TrainConfig(dataset="campus-cams")
    with pytest.raises(ConfigurationError):
        config.resolved_queue_size()
    assert TrainConfig(dataset="campus-cams", queue_size=10).resolved_queue_size() == 10


def test_toy_profile_shape():
    c = TrainConfig.toy_profile()
    assert c.backbone_profile == "toy"
    assert c.dataset == "synthetic"
    assert c.batch_size == 4
    assert c.total_steps == 300
    assert c.resize_min is None and c.resize_max is None


def test_toy_profile_overrides():
    c = TrainConfig.toy_profile(seed=3, total_steps=50, use_scene_context=False)
    assert c.seed == 3
    assert c.total_steps == 50
    assert not c.use_scene_context
    assert c.backbone_profile == "toy"


def test_round_trip_through_dict():
    c = TrainConfig(dataset="prw", base_lr=0.01, use_group_context=False)
    assert TrainConfig.from_dict(c.to_dict()) == c


def test_unknown_key_rejected():
    data = TrainConfig().to_dict()
    data["learning_rate"] = 0.1
    with pytest.raises(ConfigurationError, match="learning_rate"):
        TrainConfig.from_dict(data)


def test_yaml_file_round_trip(tmp_path):
    path = tmp_path / "run.yaml"
    c = TrainConfig.toy_profile(seed=9, queue_size=16)
    save_config(c, path)
    assert load_config(path) == c


def test_load_rejects_wrong_kind(tmp_path):
    path = tmp_path / "other.yaml"
    path.write_text("kind: grocery-list\nschema_version: 1\n")
    with pytest.raises(ConfigurationError):
        load_config(path)


def test_load_rejects_wrong_schema(tmp_path):
    path = tmp_path / "cfg.yaml"
    save_config(TrainConfig(), path)
    text = path.read_text().replace("schema_version: 1", "schema_version: 99")
    path.write_text(text)
    with pytest.raises(ConfigurationError):
        load_config(path)


def test_load_rejects_invalid_yaml(tmp_path):
    path = tmp_path / "broken.yaml"
    path.write_text("kind: [unclosed")
    with pytest.raises(ConfigurationError):
        load_config(path)


class TestValidation:
    def test_bad_profile(self):
        with pytest.raises(ConfigurationError):
            TrainConfig(backbone_profile="vgg")

    def test_bad_variant(self):
        with pytest.raises(ConfigurationError):
            TrainConfig(fusion_variant="early")

    def test_bad_thresholds(self):
        with pytest.raises(ConfigurationError):
            TrainConfig(nms_first=0.0)
        with pytest.raises(ConfigurationError):
            TrainConfig(iou_threshold=1.0)

    def test_resize_pair_coupled(self):
        with pytest.raises(ConfigurationError):
            TrainConfig(resize_min=None, resize_max=1500)
        with pytest.raises(ConfigurationError):
            TrainConfig(resize_min=1600, resize_max=1500)

    def test_bad_scalars(self):
        with pytest.raises(ConfigurationError):
            TrainConfig(batch_size=0)
        with pytest.raises(ConfigurationError):
            TrainConfig(base_lr=0.0)
        with pytest.raises(ConfigurationError):
            TrainConfig(decay_factor=0.0)
        with pytest.raises(ConfigurationError):
            TrainConfig(total_steps=0)

    def test_loss_weights_from_dict(self):
        c = TrainConfig(loss_weights={"reg_first": 2.0})
        assert c.loss_weights.reg_first == 2.0
        assert c.loss_weights.reid == 1.0
