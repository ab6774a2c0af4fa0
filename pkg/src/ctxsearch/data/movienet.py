"""Character-search reorganization of the MovieNet person annotations.

Input: per-movie JSON files (searched recursively under root) whose records
carry a cast identity, a frame image path and a body bounding box. Tolerated
record spellings::

    {"id"|"pid"|"identity": "nm0000123",
     "img"|"image"|"frame": "tt0000000/shot_0042_img_0.jpg",
     "bbox"|"body": [x1, y1, x2, y2]  (or {"bbox": [...]}),
     "height": ..., "width": ...}     (optional; else read from image file)

Records may sit at the top level, under "cast", or under "annotations".

The 3,087 cast identities are split 2,087 train / 1,000 test with a fixed
seeded draw; the training set keeps at most cap_n seeded-sampled instances
per identity. Both choices are recorded in the emitted split manifests so a
split is reproducible and shareable.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np
from PIL import Image

from ctxsearch.data.types import (
    UNLABELED,
    BoxAnnotation,
    DatasetIndex,
    ImageSample,
    clip_box,
)
from ctxsearch.errors import AnnotationError, ConfigurationError, IngestionError

# Fixed global seed: the split is an artifact, not a runtime accident.
SPLIT_SEED = 3087
TEST_IDENTITIES = 1000
SUPPORTED_CAPS = (10, 30, 70)

_ID_KEYS = ("id", "pid", "identity", "cast_id")
_IMG_KEYS = ("img", "image", "frame")


def _pick(record, keys):
    for k in keys:
        if k in record:
            return record[k]
    return None


def _identity_int(raw) -> int:
    if isinstance(raw, int):
        return raw
    s = str(raw)
    digits = "".join(ch for ch in s if ch.isdigit())
    if not digits:
        raise AnnotationError(f"MovieNet: cannot parse identity {raw!r}")
    return int(digits)


def _bbox(record):
    b = record.get("bbox", record.get("body"))
    if isinstance(b, dict):
        b = b.get("bbox")
    if b is None or len(b) != 4:
        raise AnnotationError(f"MovieNet: record lacks a bbox: {record}")
    return [float(v) for v in b]


def _iter_records(doc):
    if isinstance(doc, list):
        yield from doc
        return
    for key in ("cast", "annotations", "characters"):
        if key in doc and isinstance(doc[key], list):
            yield from doc[key]
            return
    raise AnnotationError("MovieNet: no annotation record list in file")


class _RawInstance:
    __slots__ = ("identity", "image", "box", "height", "width", "movie")

    def __init__(self, identity, image, box, height, width, movie):
        self.identity = identity
        self.image = image
        self.box = box
        self.height = height
        self.width = width
        self.movie = movie


def _scan(root: Path):
    files = sorted(root.rglob("*.json"))
    if not files:
        raise IngestionError(f"MovieNet: no annotation json under {root}")
    instances = []
    for path in files:
        try:
            doc = json.loads(path.read_text())
        except json.JSONDecodeError as e:
            raise IngestionError(f"MovieNet: unreadable json {path}: {e}") from e
        movie = doc.get("mid", doc.get("movie_id", path.stem)) if isinstance(doc, dict) else path.stem
        for rec in _iter_records(doc):
            raw_id = _pick(rec, _ID_KEYS)
            image = _pick(rec, _IMG_KEYS)
            if image is None:
                raise AnnotationError(f"MovieNet: record lacks an image path: {rec}")
            box = _bbox(rec)
            height, width = rec.get("height"), rec.get("width")
            if height is None or width is None:
                img_path = root / "images" / image
                if not img_path.is_file():
                    raise IngestionError(
                        f"MovieNet: no size in record and missing image file {img_path}"
                    )
                with Image.open(img_path) as im:
                    width, height = im.width, im.height
            identity = UNLABELED if raw_id is None else _identity_int(raw_id)
            instances.append(_RawInstance(
                identity, str(image), box, int(height), int(width), str(movie)))
    return instances


def build_movienet_cs(root, cap_n: int = 10, *, allow_any_cap: bool = False,
                      ) -> tuple[DatasetIndex, DatasetIndex]:
    """Build the character-search split. Returns (train, test)."""
    if cap_n not in SUPPORTED_CAPS and not allow_any_cap:
        raise ConfigurationError(
            f"cap_n must be one of {SUPPORTED_CAPS} (pass allow_any_cap=True "
            f"to override), got {cap_n}"
        )
    if cap_n < 1:
        raise ConfigurationError(f"cap_n must be positive, got {cap_n}")
    root = Path(root)
    if not root.is_dir():
        raise IngestionError(f"MovieNet: root is not a directory: {root}")
    instances = _scan(root)

    identities = sorted({i.identity for i in instances if i.identity != UNLABELED})
    rng = np.random.default_rng(SPLIT_SEED)
    n_test = min(TEST_IDENTITIES, max(1, len(identities) // 3)) \
        if len(identities) < 3 * TEST_IDENTITIES else TEST_IDENTITIES
    test_ids = set(np.asarray(identities)[
        rng.choice(len(identities), size=n_test, replace=False)].tolist())
    train_ids = [i for i in identities if i not in test_ids]

    by_identity: dict[int, list[_RawInstance]] = {}
    by_image: dict[str, list[_RawInstance]] = {}
    meta: dict[str, _RawInstance] = {}
    for inst in instances:
        by_image.setdefault(inst.image, []).append(inst)
        meta.setdefault(inst.image, inst)
        if inst.identity != UNLABELED:
            by_identity.setdefault(inst.identity, []).append(inst)

    test_images = {inst.image for pid in test_ids for inst in by_identity[pid]}

    # seeded per-identity subsampling for the training set
    selected_images = set()
    for pid in train_ids:
        pool = sorted(
            (i for i in by_identity[pid] if i.image not in test_images),
            key=lambda i: (i.image, i.box),
        )
        if len(pool) > cap_n:
            keep = rng.choice(len(pool), size=cap_n, replace=False)
            pool = [pool[int(k)] for k in sorted(keep)]
        selected_images.update(i.image for i in pool)

    def build(split, image_ids, vocab):
        vocab_set = set(vocab)
        images, annotations = [], []
        for image_id in sorted(image_ids):
            first = meta[image_id]
            images.append(ImageSample(
                image_id=image_id, height=first.height, width=first.width,
                source_path=str(root / "images" / image_id),
                scene_tag=first.movie,
            ))
            for inst in by_image[image_id]:
                pid = inst.identity if inst.identity in vocab_set else UNLABELED
                annotations.append(BoxAnnotation(
                    image_id=image_id,
                    box=clip_box(inst.box, first.width, first.height),
                    identity=pid,
                ))
        present = {a.identity for a in annotations if a.labeled}
        return DatasetIndex(
            name=f"movienet-cs-n{cap_n}", split=split, images=images,
            annotations=annotations,
            identities=[p for p in vocab if p in present],
        )

    train = build("train", selected_images, train_ids)
    test = build("test", test_images, sorted(test_ids))
    return train, test
