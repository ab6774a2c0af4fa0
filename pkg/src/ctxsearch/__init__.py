"""Person search toolkit: joint detection and re-identification with
global scene / local group context enhancement."""

__version__ = "0.1.0"

from ctxsearch.data.types import (
    UNLABELED,
    BoxAnnotation,
    DatasetIndex,
    EvalProtocol,
    ImageSample,
    SyntheticSpec,
)
from ctxsearch.engine.config import TrainConfig

__all__ = [
    "UNLABELED",
    "BoxAnnotation",
    "DatasetIndex",
    "EvalProtocol",
    "ImageSample",
    "SyntheticSpec",
    "TrainConfig",
    "__version__",
]
