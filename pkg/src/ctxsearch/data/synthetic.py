"""Deterministic synthetic datasets: striped rectangles on flat backgrounds.

Each identity owns an appearance (color + stripe pattern) and belongs to a
cluster. With probability scene_correlation an image is a "cluster scene":
everyone in it comes from one cluster and the background is that cluster's
own color. Otherwise the grouping ignores clusters and the background is
drawn uniformly from the palette, so neither the backdrop nor the company
carries any identity information. Train and test splits use disjoint
identity ranges (and fresh appearances), while the background palette is
shared, so only background-derived cues transfer across the split.
"""

from __future__ import annotations

import colorsys

import numpy as np

from ctxsearch.data.types import (
    BoxAnnotation,
    DatasetIndex,
    ImageSample,
    SyntheticSpec,
)
from ctxsearch.errors import GenerationError

_NOISE = 8  # per-pixel uniform noise amplitude
_MAX_PLACE_TRIES = 200


def _hue_palette(rng, n, sat, val):
    """n well-separated RGB colors: evenly spaced hues, seeded rotation."""
    offset = rng.uniform(0.0, 1.0)
    perm = rng.permutation(n)
    colors = []
    for i in range(n):
        h = (offset + perm[i] / max(n, 1)) % 1.0
        r, g, b = colorsys.hsv_to_rgb(h, sat, val)
        colors.append(np.array([r, g, b]) * 255.0)
    return colors


class _Appearance:
    def __init__(self, color, period, vertical):
        self.color = color
        self.dark = color * 0.55
        self.period = period
        self.vertical = vertical

    def paint(self, canvas, x1, y1, x2, y2):
        h, w = y2 - y1, x2 - x1
        patch = np.empty((h, w, 3))
        patch[:] = self.color
        axis = np.arange(w) if self.vertical else np.arange(h)
        stripe = (axis // self.period) % 2 == 1
        if self.vertical:
            patch[:, stripe] = self.dark
        else:
            patch[stripe, :] = self.dark
        canvas[y1:y2, x1:x2] = patch


def _person_size_range(size):
    w_lo, w_hi = max(5, round(size * 0.16)), max(6, round(size * 0.31))
    h_lo, h_hi = max(7, round(size * 0.22)), max(8, round(size * 0.41))
    if w_lo + 2 > size or h_lo + 2 > size:
        raise GenerationError(
            f"image size {size} too small to place a person"
        )
    return w_lo, min(w_hi, size - 2), h_lo, min(h_hi, size - 2)


def _boxes_overlap(box, others, max_iou=0.25):
    x1, y1, x2, y2 = box
    a = (x2 - x1) * (y2 - y1)
    for ox1, oy1, ox2, oy2 in others:
        iw = min(x2, ox2) - max(x1, ox1)
        ih = min(y2, oy2) - max(y1, oy1)
        if iw <= 0 or ih <= 0:
            continue
        inter = iw * ih
        union = a + (ox2 - ox1) * (oy2 - oy1) - inter
        if inter / union > max_iou:
            return True
    return False


class _Generator:
    def __init__(self, spec: SyntheticSpec):
        self.spec = spec
        ss = np.random.SeedSequence(spec.seed)
        pal_ss, self.train_ss, self.test_ss = ss.spawn(3)
        pal_rng = np.random.default_rng(pal_ss)
        n_app = self._appearance_count()
        person_colors = _hue_palette(pal_rng, 2 * n_app, sat=0.95, val=0.95)
        self.bg_palette = _hue_palette(
            pal_rng, spec.num_clusters, sat=0.45, val=0.30
        )
        self.appearances = {}
        for split_idx in range(2):
            for key in range(n_app):
                color = person_colors[split_idx * n_app + key]
                self.appearances[(split_idx, key)] = _Appearance(
                    color,
                    period=int(pal_rng.integers(3, 6)),
                    vertical=bool(pal_rng.integers(0, 2)),
                )

    def _appearance_count(self):
        n = self.spec.num_identities
        return (n + 1) // 2 if self.spec.twin_identities else n

    def _appearance_key(self, local_id):
        return local_id // 2 if self.spec.twin_identities else local_id

    def cluster_of(self, local_id):
        return local_id % self.spec.num_clusters

    def build_split(self, split, split_idx, rng):
        spec = self.spec
        size = spec.image_size
        w_lo, w_hi, h_lo, h_hi = _person_size_range(size)
        base = split_idx * spec.num_identities
        remaining = {base + j: spec.instances_per_identity
                     for j in range(spec.num_identities)}
        members = {}
        for j in range(spec.num_identities):
            members.setdefault(self.cluster_of(j), []).append(base + j)

        images, annotations = [], []
        k = 0
        while any(v > 0 for v in remaining.values()):
            correlated = rng.uniform() < spec.scene_correlation
            if correlated:
                # cluster scene: one cluster's members on their own backdrop,
                # favoring the cluster with the most work left
                need = {c: sum(remaining[i] for i in ids)
                        for c, ids in members.items()}
                cluster = max(sorted(need), key=lambda c: need[c])
                pool = sorted(members[cluster],
                              key=lambda i: -remaining[i])
                bg_idx = cluster
            else:
                # arbitrary grouping: the most-needed identity plus random
                # company from any cluster, on a random backdrop
                active = [i for i, v in remaining.items() if v > 0]
                anchor = max(sorted(active), key=lambda i: remaining[i])
                rest = [i for i in active if i != anchor]
                rng.shuffle(rest)
                pool = [anchor] + rest
                bg_idx = int(rng.integers(0, spec.num_clusters))
            n = int(rng.integers(1, min(spec.max_persons_per_image,
                                        len(pool)) + 1))
            chosen = pool[:n]
            rng.shuffle(chosen)
            canvas = np.empty((size, size, 3))
            canvas[:] = self.bg_palette[bg_idx]

            boxes = []
            placed = []
            for pid in chosen:
                for attempt in range(_MAX_PLACE_TRIES):
                    w = int(rng.integers(w_lo, w_hi + 1))
                    h = int(rng.integers(h_lo, h_hi + 1))
                    x1 = int(rng.integers(1, size - w))
                    y1 = int(rng.integers(1, size - h))
                    box = (x1, y1, x1 + w, y1 + h)
                    if not _boxes_overlap(box, boxes):
                        break
                else:
                    if not boxes:
                        raise GenerationError(
                            f"image size {size} too small to place a person"
                        )
                    continue  # drop this person, counts caught up later
                boxes.append(box)
                placed.append(pid)
                app = self.appearances[
                    (split_idx, self._appearance_key(pid - base))]
                app.paint(canvas, *box)

            noise = rng.integers(-_NOISE, _NOISE + 1, size=canvas.shape)
            pixels = np.clip(canvas + noise, 0, 255).astype(np.uint8)
            image_id = f"syn-{split}-{k:05d}"
            images.append(ImageSample(
                image_id=image_id,
                height=size,
                width=size,
                source_path="",
                scene_tag=f"bg{bg_idx}",
                _pixels=pixels,
            ))
            for pid, box in zip(placed, boxes):
                annotations.append(BoxAnnotation(
                    image_id=image_id,
                    box=tuple(float(v) for v in box),
                    identity=pid,
                ))
                remaining[pid] = max(0, remaining[pid] - 1)
            k += 1

        identities = sorted({a.identity for a in annotations})
        return DatasetIndex(
            name=f"synthetic-{spec.seed}",
            split=split,
            images=images,
            annotations=annotations,
            identities=identities,
        )


def make_synthetic(spec: SyntheticSpec) -> tuple[DatasetIndex, DatasetIndex]:
    """Generate (train, test) indices; test identities are disjoint from
    train identities but share the cluster/background structure."""
    gen = _Generator(spec)
    train = gen.build_split("train", 0, np.random.default_rng(gen.train_ss))
    test = gen.build_split("test", 1, np.random.default_rng(gen.test_ss))
    return train, test


def materialize(index: DatasetIndex, out_dir) -> DatasetIndex:
    """Write in-memory images to PNG files so the split can be shared
    through a manifest; returns a file-backed copy of the index."""
    from pathlib import Path

    from PIL import Image

    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    images = []
    for sample in index.images:
        path = out_dir / f"{sample.image_id}.png"
        Image.fromarray(sample.pixels).save(path)
        images.append(
            ImageSample(
                image_id=sample.image_id,
                height=sample.height,
                width=sample.width,
                source_path=str(path),
                scene_tag=sample.scene_tag,
            )
        )
    return DatasetIndex(
        name=index.name,
        split=index.split,
        images=images,
        annotations=list(index.annotations),
        identities=list(index.identities),
    )
