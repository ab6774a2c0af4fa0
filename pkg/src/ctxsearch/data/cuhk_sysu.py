"""CUHK-SYSU loader: published .mat annotation layout.

Expected tree::

    root/
      Image/SSM/*.jpg
      annotation/Images.mat                  all images + boxes (idlocate = x,y,w,h)
      annotation/pool.mat                    test image names
      annotation/Person.mat                  identity catalogue (unused here)
      annotation/test/train_test/Train.mat   per-identity train appearances
      annotation/test/train_test/TestG<K>.mat  official query/gallery protocol

Train identities are numbered by their position in Train.mat, test
identities continue the numbering by their position in TestG100.mat.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np
from PIL import Image
from scipy.io import loadmat

from ctxsearch.data.matutil import mat_str, mat_structs, mat_vec
from ctxsearch.data.types import (
    UNLABELED,
    BoxAnnotation,
    DatasetIndex,
    EvalProtocol,
    ImageSample,
    Query,
    clip_box,
)
from ctxsearch.errors import AnnotationError, IngestionError

_DEFAULT_TEST_GALLERY = 100


def _require(root: Path, rel: str) -> Path:
    path = root / rel
    if not path.exists():
        raise IngestionError(f"CUHK-SYSU: missing {path}")
    return path


def _image_size(root: Path, imname: str):
    path = root / "Image" / "SSM" / imname
    if not path.is_file():
        raise IngestionError(f"CUHK-SYSU: missing image file {path}")
    with Image.open(path) as im:
        return im.width, im.height


def _xywh_to_xyxy(vec, imname):
    x, y, w, h = [float(v) for v in vec[:4]]
    if w <= 0 or h <= 0:
        raise AnnotationError(f"CUHK-SYSU: malformed box {vec} in {imname!r}")
    return (x, y, x + w, y + h)


def _load_image_boxes(root: Path):
    """imname -> list[(x1,y1,x2,y2)] from Images.mat, clipped to bounds."""
    mat = loadmat(str(_require(root, "annotation/Images.mat")))
    entries = mat_structs(mat["Img"])
    sizes, boxes = {}, {}
    for e in entries:
        imname = mat_str(e["imname"])
        w, h = _image_size(root, imname)
        sizes[imname] = (w, h)
        out = []
        for b in mat_structs(e["box"]):
            xyxy = _xywh_to_xyxy(mat_vec(b["idlocate"]), imname)
            out.append(clip_box(xyxy, w, h))
        boxes[imname] = out
    return sizes, boxes


def _nearest_box(candidates, target, imname):
    """Index of the stored box matching an appearance record."""
    tx = np.asarray(target)
    best, best_d = None, None
    for i, box in enumerate(candidates):
        d = float(np.abs(np.asarray(box) - tx).sum())
        if best_d is None or d < best_d:
            best, best_d = i, d
    if best is None or best_d > 4.0:
        raise AnnotationError(
            f"CUHK-SYSU: appearance box {target} not found in {imname!r}"
        )
    return best


def load_cuhk_sysu(root) -> tuple[DatasetIndex, DatasetIndex]:
    """Load the standard train/test split. Returns (train, test)."""
    root = Path(root)
    if not root.is_dir():
        raise IngestionError(f"CUHK-SYSU: root is not a directory: {root}")
    sizes, image_boxes = _load_image_boxes(root)

    pool = loadmat(str(_require(root, "annotation/pool.mat")))["pool"]
    test_names = {mat_str(x) for x in mat_structs(pool)}
    unknown = test_names - set(sizes)
    if unknown:
        raise AnnotationError(
            f"CUHK-SYSU: pool.mat names {sorted(unknown)[:3]} missing from Images.mat"
        )
    train_names = sorted(set(sizes) - test_names)

    # identity -> [(imname, xyxy)] for the train split
    train_mat = loadmat(str(_require(root, "annotation/test/train_test/Train.mat")))
    identity = {name: {} for name in sizes}  # imname -> {box_idx: pid}
    train_pids = []
    for pid, entry in enumerate(mat_structs(train_mat["Train"])):
        train_pids.append(pid)
        for app in mat_structs(entry["scene" if "scene" in _fields(entry) else "Appear"]):
            imname = mat_str(app["imname"])
            if imname not in image_boxes:
                raise AnnotationError(
                    f"CUHK-SYSU: train appearance references unknown image {imname!r}"
                )
            w, h = sizes[imname]
            xyxy = clip_box(_xywh_to_xyxy(mat_vec(app["idlocate"]), imname), w, h)
            idx = _nearest_box(image_boxes[imname], xyxy, imname)
            identity[imname][idx] = pid

    # test identities from the official protocol file
    protocol = _load_testg(root, _DEFAULT_TEST_GALLERY)
    test_base = len(train_pids)
    test_pids = []
    for qi, (qname, qbox, gallery_entries) in enumerate(protocol):
        pid = test_base + qi
        test_pids.append(pid)
        for imname, xyxy in [(qname, qbox)] + gallery_entries:
            w, h = sizes[imname]
            idx = _nearest_box(image_boxes[imname], clip_box(xyxy, w, h), imname)
            identity[imname][idx] = pid

    def build(split, names, pids):
        images, annotations = [], []
        pid_set = set(pids)
        for imname in names:
            w, h = sizes[imname]
            images.append(ImageSample(
                image_id=imname, height=h, width=w,
                source_path=str(root / "Image" / "SSM" / imname),
            ))
            for idx, box in enumerate(image_boxes[imname]):
                pid = identity[imname].get(idx, UNLABELED)
                if pid not in pid_set:
                    pid = UNLABELED
                annotations.append(BoxAnnotation(imname, box, pid))
        return DatasetIndex(
            name="cuhk-sysu", split=split, images=images,
            annotations=annotations, identities=list(pids),
        )

    train = build("train", train_names, train_pids)
    test = build("test", sorted(test_names), test_pids)
    return train, test


def _fields(entry):
    return entry.dtype.names or ()


def _load_testg(root: Path, gallery_size: int):
    """Parse TestG<K>.mat into [(query_imname, query_xyxy, [(imname, xyxy)])]."""
    path = _require(root, f"annotation/test/train_test/TestG{gallery_size}.mat")
    mat = loadmat(str(path))
    key = f"TestG{gallery_size}"
    if key not in mat:
        raise IngestionError(f"CUHK-SYSU: {path} lacks variable {key}")
    out = []
    for entry in mat_structs(mat[key]):
        q = mat_structs(entry["Query"])[0]
        qname = mat_str(q["imname"])
        qbox = _xywh_to_xyxy(mat_vec(q["idlocate"]), qname)
        gallery = []
        for g in mat_structs(entry["Gallery"]):
            loc = mat_vec(g["idlocate"])
            if loc.size < 4:
                continue  # distractor image: no instance of the query person
            imname = mat_str(g["imname"])
            gallery.append((imname, _xywh_to_xyxy(loc, imname)))
        out.append((qname, qbox, gallery))
    return out


def load_test_protocol(root, gallery_size: int = _DEFAULT_TEST_GALLERY) -> EvalProtocol:
    """Official fixed-gallery protocol from TestG<K>.mat (gallery order as
    published, query image excluded)."""
    root = Path(root)
    mat = loadmat(str(_require(root, f"annotation/test/train_test/TestG{gallery_size}.mat")))
    key = f"TestG{gallery_size}"
    queries, galleries = [], []
    _, test = load_cuhk_sysu(root)
    by_image = {im.image_id: im for im in test.images}
    test_pid_of = _query_pids(test)
    for qi, entry in enumerate(mat_structs(mat[key])):
        q = mat_structs(entry["Query"])[0]
        qname = mat_str(q["imname"])
        im = by_image[qname]
        qbox = clip_box(_xywh_to_xyxy(mat_vec(q["idlocate"]), qname), im.width, im.height)
        gallery = []
        for g in mat_structs(entry["Gallery"]):
            gname = mat_str(g["imname"])
            if gname != qname:
                gallery.append(gname)
        queries.append(Query(qname, qbox, test_pid_of[qi]))
        galleries.append(gallery)
    return EvalProtocol(queries=queries, galleries=galleries, gallery_size=gallery_size)


def _query_pids(test: DatasetIndex):
    # query order equals identity order by construction of load_cuhk_sysu
    return {i: pid for i, pid in enumerate(test.identities)}
