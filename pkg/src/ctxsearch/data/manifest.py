"""Split manifests: line-oriented JSON, one record per image.

The first line is a header carrying the schema version, dataset name, split
and identity vocabulary; every following line describes one image with its
boxes. A split is an artifact that can be stored, diffed and re-read.
"""

from __future__ import annotations

import json
from pathlib import Path

from ctxsearch.data.types import BoxAnnotation, DatasetIndex, ImageSample
from ctxsearch.errors import IngestionError

SCHEMA_VERSION = 1


def write_manifest(index: DatasetIndex, path, extra: dict | None = None):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    header = {
        "schema_version": SCHEMA_VERSION,
        "kind": "ctxsearch-split",
        "name": index.name,
        "split": index.split,
        "identities": list(index.identities),
    }
    if extra:
        header.update(extra)
    with open(path, "w") as fh:
        fh.write(json.dumps(header) + "\n")
        for im in index.images:
            record = {
                "image_id": im.image_id,
                "source_path": im.source_path,
                "height": im.height,
                "width": im.width,
                "scene_tag": im.scene_tag,
                "boxes": [
                    {"box": list(a.box), "identity": a.identity}
                    for a in index.boxes_for(im.image_id)
                ],
            }
            fh.write(json.dumps(record) + "\n")
    return path


def read_manifest(path) -> DatasetIndex:
    path = Path(path)
    if not path.is_file():
        raise IngestionError(f"manifest not found: {path}")
    with open(path) as fh:
        lines = [ln for ln in fh if ln.strip()]
    if not lines:
        raise IngestionError(f"empty manifest: {path}")
    header = json.loads(lines[0])
    if header.get("kind") != "ctxsearch-split":
        raise IngestionError(f"{path}: not a split manifest")
    if header.get("schema_version") != SCHEMA_VERSION:
        raise IngestionError(
            f"{path}: unsupported schema version {header.get('schema_version')}"
        )
    images, annotations = [], []
    for ln in lines[1:]:
        rec = json.loads(ln)
        images.append(ImageSample(
            image_id=rec["image_id"],
            height=rec["height"],
            width=rec["width"],
            source_path=rec.get("source_path", ""),
            scene_tag=rec.get("scene_tag"),
        ))
        for b in rec["boxes"]:
            annotations.append(BoxAnnotation(
                image_id=rec["image_id"],
                box=tuple(float(v) for v in b["box"]),
                identity=int(b["identity"]),
            ))
    return DatasetIndex(
        name=header["name"],
        split=header["split"],
        images=images,
        annotations=annotations,
        identities=[int(i) for i in header["identities"]],
    )
