"""Value types shared by the context branches and the inference path."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

CONTEXT_DIM = 128

_KINDS = ("scene", "group")


@dataclass(frozen=True)
class ContextFeature:
    """A pooled context vector attached to one candidate box.

    kind is "scene" for whole-image context and "group" for the
    co-traveler context pooled from the other people in the frame.
    """

    vector: np.ndarray
    kind: str

    def __post_init__(self):
        if self.kind not in _KINDS:
            raise ValueError(f"kind must be one of {_KINDS}, got {self.kind!r}")
        vec = np.asarray(self.vector, dtype=np.float32)
        if vec.ndim != 1 or vec.shape[0] != CONTEXT_DIM:
            raise ValueError(f"context vector must have shape ({CONTEXT_DIM},), got {vec.shape}")
        if not np.all(np.isfinite(vec)):
            raise ValueError("context vector contains non-finite values")
        object.__setattr__(self, "vector", vec)


@dataclass(frozen=True)
class PersonEmbedding:
    """Final output of the search head for one detected person."""

    box: tuple[float, float, float, float]
    score: float
    vector: np.ndarray = field(repr=False)

    def __post_init__(self):
        vec = np.asarray(self.vector, dtype=np.float32)
        if vec.ndim != 1:
            raise ValueError("embedding vector must be 1-d")
        if not np.all(np.isfinite(vec)):
            raise ValueError("embedding vector contains non-finite values")
        object.__setattr__(self, "vector", vec)
        object.__setattr__(self, "score", float(self.score))
        object.__setattr__(self, "box", tuple(float(v) for v in self.box))

    @property
    def dim(self) -> int:
        return int(self.vector.shape[0])
