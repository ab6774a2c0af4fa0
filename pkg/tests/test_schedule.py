import pytest

from ctxsearch.engine.config import TrainConfig
from ctxsearch.engine.schedule import lr_at, lr_for_epoch


@pytest.fixture()
def config():
    return TrainConfig()


def test_defaults_before_decay(config):
    assert lr_for_epoch(config, 1) == pytest.approx(0.003)
    assert lr_for_epoch(config, 10) == pytest.approx(0.003)
    assert lr_for_epoch(config, 15) == pytest.approx(0.003)


def test_defaults_after_decay(config):
    assert lr_for_epoch(config, 16) == pytest.approx(0.0003)
    assert lr_for_epoch(config, 17) == pytest.approx(0.0003)
    assert lr_for_epoch(config, 18) == pytest.approx(0.0003)


def test_epoch_must_be_one_based(config):
    with pytest.raises(ValueError):
        lr_for_epoch(config, 0)


def test_warmup_midpoint_is_half_base(config):
    # 100 steps/epoch, one warmup epoch: step 49 sits at 50/100 of base
    assert lr_at(config, 49, 100) == pytest.approx(0.0015)


def test_warmup_is_monotone_and_reaches_base(config):
    values = [lr_at(config, s, 100) for s in range(100)]
    assert all(b > a for a, b in zip(values, values[1:]))
    assert values[0] == pytest.approx(0.003 / 100)
    assert values[-1] == pytest.approx(0.003)


def test_post_warmup_follows_epoch_schedule(config):
    spe = 100
    # epoch 10 spans steps 900..999
    assert lr_at(config, 950, spe) == pytest.approx(0.003)
    # epoch 16 is the decay epoch
    assert lr_at(config, 15 * spe, spe) == pytest.approx(0.0003)
    # epoch 17 stays decayed
    assert lr_at(config, 16 * spe + 37, spe) == pytest.approx(0.0003)


def test_exactly_three_regimes(config):
    spe = 50
    values = [lr_at(config, s, spe) for s in range(18 * spe)]
    distinct = sorted(set(round(v, 12) for v in values[spe:]), reverse=True)
    assert distinct == [pytest.approx(0.003), pytest.approx(0.0003)]
    assert len(set(values[:spe])) == spe  # warmup: strictly increasing ramp


def test_no_warmup_profile():
    config = TrainConfig(warmup_epochs=0.0)
    assert lr_at(config, 0, 10) == pytest.approx(0.003)


def test_fractional_warmup():
    config = TrainConfig(warmup_epochs=0.5)
    # 10 steps/epoch: 5 warmup steps, reaching base at step 4
    assert lr_at(config, 4, 10) == pytest.approx(0.003)
    assert lr_at(config, 2, 10) == pytest.approx(0.003 * 3 / 5)


def test_step_validation(config):
    with pytest.raises(ValueError):
        lr_at(config, -1, 10)
    with pytest.raises(ValueError):
        lr_at(config, 0, 0)
