import pytest
import torch

from ctxsearch.data.synthetic import make_synthetic
from ctxsearch.data.types import DatasetIndex, SyntheticSpec
from ctxsearch.engine.config import TrainConfig
from ctxsearch.engine.trainer import Trainer
from ctxsearch.model import PersonSearchModel

torch.set_num_threads(1)


def relabel_as_test(index: DatasetIndex) -> DatasetIndex:
    """Overfit experiments query the training images themselves."""
    return DatasetIndex(
        name=index.name,
        split="test",
        images=index.images,
        annotations=index.annotations,
        identities=index.identities,
    )


@pytest.fixture(scope="session")
def overfit_index() -> DatasetIndex:
    """Small synthetic train split sized for minutes-scale overfitting."""
    spec = SyntheticSpec(
        num_identities=8, instances_per_identity=5, image_size=64, seed=1
    )
    train, _ = make_synthetic(spec)
    return train


@pytest.fixture(scope="session")
def overfit_trainer(overfit_index, tmp_path_factory) -> Trainer:
    """One full toy-profile training run, shared by every test that needs
    a trained model (the slow fixture: a few hundred SGD steps)."""
    config = TrainConfig.toy_profile(queue_size=16, seed=0)
    trainer = Trainer(config, overfit_index, tmp_path_factory.mktemp("overfit-run"))
    trainer.run()
    return trainer


@pytest.fixture(scope="session")
def tiny_pair() -> tuple[DatasetIndex, DatasetIndex]:
    """Fast synthetic train/test pair for plumbing tests."""
    spec = SyntheticSpec(
        num_identities=4, instances_per_identity=3, image_size=48, seed=7
    )
    return make_synthetic(spec)


@pytest.fixture(scope="session")
def toy_model() -> PersonSearchModel:
    """Untrained toy-profile model for shape and contract tests."""
    torch.manual_seed(0)
    return PersonSearchModel("toy", head_batch_size=16, max_candidates=16)
