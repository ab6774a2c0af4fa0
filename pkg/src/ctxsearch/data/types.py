"""Core domain types shared by loaders, training and evaluation."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from PIL import Image

from ctxsearch.errors import AnnotationError, ConfigurationError

# Identity sentinel for annotated persons without an identity label.
UNLABELED = -1


@dataclass
class ImageSample:
    """One whole (uncropped) image. Pixels are loaded lazily from
    source_path unless the sample was constructed with an in-memory array."""

    image_id: str
    height: int
    width: int
    source_path: str = ""
    scene_tag: str | None = None
    _pixels: np.ndarray | None = field(default=None, repr=False)

    def __post_init__(self):
        if self.height < 1 or self.width < 1:
            raise AnnotationError(
                f"image {self.image_id!r}: non-positive size "
                f"{self.height}x{self.width}"
            )
        if self._pixels is not None:
            self._check_pixels(self._pixels)

    def _check_pixels(self, arr):
        if arr.dtype != np.uint8 or arr.ndim != 3 or arr.shape[2] != 3:
            raise AnnotationError(
                f"image {self.image_id!r}: pixels must be HxWx3 uint8, "
                f"got {arr.dtype} {arr.shape}"
            )

    @property
    def pixels(self) -> np.ndarray:
        """HxWx3 uint8 array; reads source_path on first access."""
        if self._pixels is None:
            with Image.open(self.source_path) as im:
                self._pixels = np.asarray(im.convert("RGB"))
            self._check_pixels(self._pixels)
        return self._pixels


@dataclass(frozen=True)
class BoxAnnotation:
    """A person box inside one image, with (x1, y1, x2, y2) pixel corners."""

    image_id: str
    box: tuple[float, float, float, float]
    identity: int = UNLABELED

    def __post_init__(self):
        x1, y1, x2, y2 = self.box
        if not (x2 > x1 and y2 > y1):
            raise AnnotationError(
                f"image {self.image_id!r}: degenerate box {self.box}"
            )
        if self.identity < 0 and self.identity != UNLABELED:
            raise AnnotationError(
                f"image {self.image_id!r}: identity must be non-negative "
                f"or UNLABELED, got {self.identity}"
            )

    @property
    def area(self) -> float:
        x1, y1, x2, y2 = self.box
        return (x2 - x1) * (y2 - y1)

    @property
    def labeled(self) -> bool:
        return self.identity != UNLABELED


def clip_box(box, width, height):
    """Clip corner coordinates to image bounds."""
    x1, y1, x2, y2 = box
    return (
        float(min(max(x1, 0.0), width)),
        float(min(max(y1, 0.0), height)),
        float(min(max(x2, 0.0), width)),
        float(min(max(y2, 0.0), height)),
    )


@dataclass
class DatasetIndex:
    """Images, box annotations and the identity vocabulary of one split."""

    name: str
    split: str  # "train" or "test"
    images: list[ImageSample]
    annotations: list[BoxAnnotation]
    identities: list[int]

    def __post_init__(self):
        self._by_image: dict[str, list[BoxAnnotation]] = {}
        self._label_of: dict[int, int] = {}
        self.validate()

    def validate(self):
        if self.split not in ("train", "test"):
            raise ConfigurationError(f"split must be train/test, got {self.split!r}")
        ids = [im.image_id for im in self.images]
        id_set = set(ids)
        if len(id_set) != len(ids):
            raise AnnotationError(f"{self.name}: duplicate image_id in index")
        if len(set(self.identities)) != len(self.identities):
            raise AnnotationError(f"{self.name}: duplicate identity in vocabulary")
        vocab = set(self.identities)
        by_image = {i: [] for i in id_set}
        sizes = {im.image_id: (im.width, im.height) for im in self.images}
        for ann in self.annotations:
            if ann.image_id not in id_set:
                raise AnnotationError(
                    f"{self.name}: annotation references unknown image "
                    f"{ann.image_id!r}"
                )
            if ann.labeled and ann.identity not in vocab:
                raise AnnotationError(
                    f"{self.name}: identity {ann.identity} of image "
                    f"{ann.image_id!r} missing from vocabulary"
                )
            w, h = sizes[ann.image_id]
            x1, y1, x2, y2 = ann.box
            if x1 < 0 or y1 < 0 or x2 > w or y2 > h:
                raise AnnotationError(
                    f"{self.name}: box {ann.box} outside image "
                    f"{ann.image_id!r} ({w}x{h})"
                )
            by_image[ann.image_id].append(ann)
        self._by_image = by_image
        self._label_of = {pid: i for i, pid in enumerate(self.identities)}
        self._image_by_id = {im.image_id: im for im in self.images}

    def __len__(self):
        return len(self.images)

    @property
    def num_identities(self) -> int:
        return len(self.identities)

    def boxes_for(self, image_id: str) -> list[BoxAnnotation]:
        return self._by_image.get(image_id, [])

    def label_of(self, identity: int) -> int:
        """Contiguous 0-based label of an identity (its vocabulary position)."""
        return self._label_of[identity]

    def image(self, image_id: str) -> ImageSample:
        return self._image_by_id[image_id]


@dataclass(frozen=True)
class Query:
    image_id: str
    box: tuple[float, float, float, float]
    identity: int


@dataclass
class EvalProtocol:
    """Queries plus the per-query list of gallery image ids to search."""

    queries: list[Query]
    galleries: list[list[str]]
    gallery_size: int | None  # None means the whole test set

    def __post_init__(self):
        if len(self.queries) != len(self.galleries):
            raise ConfigurationError("queries and galleries must be parallel lists")


@dataclass(frozen=True)
class SyntheticSpec:
    """Recipe for a deterministic desk-scale dataset of colored, striped
    rectangles ("persons") on flat backgrounds.

    scene_correlation is the probability that an image's background color
    is the one assigned to the identity cluster of its persons; otherwise
    the background is drawn uniformly from the palette. With
    twin_identities, identities are paired into look-alikes that only the
    background (cluster) can tell apart.
    """

    num_identities: int
    instances_per_identity: int
    image_size: int = 64
    scene_correlation: float = 0.0
    seed: int = 0
    num_clusters: int = 4
    twin_identities: bool = False
    max_persons_per_image: int = 4

    def __post_init__(self):
        if not 0.0 <= self.scene_correlation <= 1.0:
            raise ConfigurationError(
                f"scene_correlation must be in [0,1], got {self.scene_correlation}"
            )
        if self.num_identities < 1 or self.instances_per_identity < 1:
            raise ConfigurationError("need at least one identity and one instance")
        if not 1 <= self.max_persons_per_image <= 4:
            raise ConfigurationError("max_persons_per_image must be in 1..4")
        if self.num_clusters < 1:
            raise ConfigurationError("num_clusters must be positive")
