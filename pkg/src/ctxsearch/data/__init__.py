from ctxsearch.data.types import (
    UNLABELED,
    BoxAnnotation,
    DatasetIndex,
    EvalProtocol,
    ImageSample,
    Query,
    SyntheticSpec,
)
from ctxsearch.data.synthetic import make_synthetic
from ctxsearch.data.protocol import build_protocol
from ctxsearch.data.cuhk_sysu import load_cuhk_sysu
from ctxsearch.data.prw import load_prw
from ctxsearch.data.movienet import build_movienet_cs
from ctxsearch.data.manifest import read_manifest, write_manifest

__all__ = [
    "UNLABELED",
    "BoxAnnotation",
    "DatasetIndex",
    "EvalProtocol",
    "ImageSample",
    "Query",
    "SyntheticSpec",
    "make_synthetic",
    "build_protocol",
    "load_cuhk_sysu",
    "load_prw",
    "build_movienet_cs",
    "read_manifest",
    "write_manifest",
]
