"""PRW loader: published .mat annotation layout.

Expected tree::

    root/
      frames/*.jpg
      annotations/<frame>.jpg.mat   rows [pid, x, y, w, h] under one of the
                                    keys box_new / anno_file / anno_previous
      frame_train.mat               img_index_train (names without extension)
      frame_test.mat                img_index_test
      query_info.txt                "pid x y w h frame_name" per line

pid -2 marks an unlabeled person. Identity values are the raw positive pids.
The camera id parsed from the frame name (c1s3_...) becomes the scene_tag.
"""

from __future__ import annotations

import re
from pathlib import Path

from PIL import Image
from scipy.io import loadmat

from ctxsearch.data.matutil import mat_str, mat_structs, unwrap
from ctxsearch.data.types import (
    UNLABELED,
    BoxAnnotation,
    DatasetIndex,
    ImageSample,
    clip_box,
)
from ctxsearch.errors import AnnotationError, IngestionError

_BOX_KEYS = ("box_new", "anno_file", "anno_previous")


def _require(root: Path, rel: str) -> Path:
    path = root / rel
    if not path.exists():
        raise IngestionError(f"PRW: missing {path}")
    return path


def _frame_names(root: Path, fname: str, key: str):
    mat = loadmat(str(_require(root, fname)))
    if key not in mat:
        raise IngestionError(f"PRW: {fname} lacks variable {key}")
    return [mat_str(x) for x in mat_structs(mat[key])]


def _load_frame(root: Path, name: str):
    img_path = root / "frames" / f"{name}.jpg"
    if not img_path.is_file():
        raise IngestionError(f"PRW: missing image file {img_path}")
    with Image.open(img_path) as im:
        width, height = im.width, im.height
    ann_path = _require(root, f"annotations/{name}.jpg.mat")
    mat = loadmat(str(ann_path))
    rows = None
    for key in _BOX_KEYS:
        if key in mat:
            rows = unwrap(mat[key])
            break
    if rows is None:
        raise AnnotationError(f"PRW: {ann_path} holds none of {_BOX_KEYS}")
    annotations = []
    for row in rows.reshape(-1, rows.shape[-1]):
        pid, x, y, w, h = [float(v) for v in row[:5]]
        if w <= 0 or h <= 0:
            raise AnnotationError(f"PRW: malformed box {row} in {name!r}")
        identity = UNLABELED if pid < 0 else int(pid)
        annotations.append(BoxAnnotation(
            image_id=name,
            box=clip_box((x, y, x + w, y + h), width, height),
            identity=identity,
        ))
    camera = re.match(r"(c\d+)", name)
    sample = ImageSample(
        image_id=name, height=height, width=width,
        source_path=str(img_path),
        scene_tag=camera.group(1) if camera else None,
    )
    return sample, annotations


def load_prw(root) -> tuple[DatasetIndex, DatasetIndex]:
    """Load the standard train/test split. Returns (train, test)."""
    root = Path(root)
    if not root.is_dir():
        raise IngestionError(f"PRW: root is not a directory: {root}")
    splits = {
        "train": _frame_names(root, "frame_train.mat", "img_index_train"),
        "test": _frame_names(root, "frame_test.mat", "img_index_test"),
    }
    out = []
    for split, names in splits.items():
        images, annotations = [], []
        for name in sorted(names):
            sample, anns = _load_frame(root, name)
            images.append(sample)
            annotations.extend(anns)
        identities = sorted({a.identity for a in annotations if a.labeled})
        out.append(DatasetIndex(
            name="prw", split=split, images=images,
            annotations=annotations, identities=identities,
        ))
    return out[0], out[1]


def load_queries(root) -> list[tuple[int, tuple[float, float, float, float], str]]:
    """Parse query_info.txt into (pid, xyxy box, frame name) tuples."""
    root = Path(root)
    path = _require(root, "query_info.txt")
    queries = []
    for line in path.read_text().splitlines():
        parts = line.split()
        if not parts:
            continue
        if len(parts) < 6:
            raise AnnotationError(f"PRW: malformed query line {line!r}")
        pid = int(float(parts[0]))
        x, y, w, h = [float(v) for v in parts[1:5]]
        queries.append((pid, (x, y, x + w, y + h), parts[5]))
    return queries
