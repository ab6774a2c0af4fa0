"""Independent reference implementations the tests compare against.

Everything here is deliberately naive: plain Python loops over numpy
arrays, sharing no code with the package. Where the package vectorizes
or delegates to torchvision, these walk every pair and every sample
point explicitly, so an agreement between the two routes is meaningful.
"""

from __future__ import annotations

import numpy as np


# ------------------------------------------------------------------- boxes


def iou_ref(a, b) -> float:
    ix1, iy1 = max(a[0], b[0]), max(a[1], b[1])
    ix2, iy2 = min(a[2], b[2]), min(a[3], b[3])
    iw, ih = max(0.0, ix2 - ix1), max(0.0, iy2 - iy1)
    inter = iw * ih
    if inter == 0.0:
        return 0.0
    area_a = max(0.0, a[2] - a[0]) * max(0.0, a[3] - a[1])
    area_b = max(0.0, b[2] - b[0]) * max(0.0, b[3] - b[1])
    return inter / (area_a + area_b - inter)


def nms_ref(boxes, scores, iou_threshold) -> list[int]:
    """Greedy pairwise suppression; ties by box coordinates then index."""
    boxes = np.asarray(boxes, dtype=np.float64)
    scores = np.asarray(scores, dtype=np.float64)
    order = sorted(
        range(len(scores)),
        key=lambda i: (-scores[i], tuple(boxes[i]), i),
    )
    kept: list[int] = []
    for i in order:
        if all(iou_ref(boxes[i], boxes[j]) <= iou_threshold for j in kept):
            kept.append(i)
    return kept


def assign_ref(proposals, ground_truth, iou_threshold, low_threshold=None):
    """Exhaustive max-IoU assignment.

    Returns (labels, matched_index) with labels 1 positive / 0 negative /
    -1 ignored (inside [low_threshold, iou_threshold) when a low
    threshold is given).
    """
    proposals = np.asarray(proposals, dtype=np.float64)
    ground_truth = np.asarray(ground_truth, dtype=np.float64).reshape(-1, 4)
    labels = np.zeros(len(proposals), dtype=np.int64)
    matched = np.full(len(proposals), -1, dtype=np.int64)
    for i, prop in enumerate(proposals):
        best, best_iou = -1, 0.0
        for j, gt in enumerate(ground_truth):
            overlap = iou_ref(prop, gt)
            if overlap > best_iou:
                best, best_iou = j, overlap
        if best >= 0 and best_iou >= iou_threshold:
            labels[i] = 1
            matched[i] = best
        elif low_threshold is not None and best_iou >= low_threshold:
            labels[i] = -1
    return labels, matched


# ---------------------------------------------------------------- roi align


def _bilinear(channel, y, x):
    """Sample one channel at a continuous point, zero outside the map."""
    h, w = channel.shape
    if y < -1.0 or y > h or x < -1.0 or x > w:
        return 0.0
    y = min(max(y, 0.0), h - 1.0)
    x = min(max(x, 0.0), w - 1.0)
    y0, x0 = int(np.floor(y)), int(np.floor(x))
    y1, x1 = min(y0 + 1, h - 1), min(x0 + 1, w - 1)
    ly, lx = y - y0, x - x0
    return (
        channel[y0, x0] * (1 - ly) * (1 - lx)
        + channel[y0, x1] * (1 - ly) * lx
        + channel[y1, x0] * ly * (1 - lx)
        + channel[y1, x1] * ly * lx
    )


def roi_align_ref(feature, box, resolution, stride, sampling_ratio=2):
    """Half-pixel-aligned RoI pooling of one box, averaged bilinear samples.

    feature is [C, H, W]; box is (x1, y1, x2, y2) in input-image pixels.
    """
    feature = np.asarray(feature, dtype=np.float64)
    c = feature.shape[0]
    x1, y1, x2, y2 = [v / stride - 0.5 for v in box]
    bin_h = (y2 - y1) / resolution
    bin_w = (x2 - x1) / resolution
    out = np.zeros((c, resolution, resolution))
    for ch in range(c):
        for i in range(resolution):
            for j in range(resolution):
                acc = 0.0
                for si in range(sampling_ratio):
                    for sj in range(sampling_ratio):
                        y = y1 + (i + (si + 0.5) / sampling_ratio) * bin_h
                        x = x1 + (j + (sj + 0.5) / sampling_ratio) * bin_w
                        acc += _bilinear(feature[ch], y, x)
                out[ch, i, j] = acc / (sampling_ratio**2)
    return out


# ------------------------------------------------------------------- losses


def softmax_ce_ref(logits, label) -> float:
    """Cross-entropy of one row of logits; -inf entries are masked out."""
    logits = np.asarray(logits, dtype=np.float64)
    log_z = np.logaddexp.reduce(logits[np.isfinite(logits)])
    return float(log_z - logits[label])


def finite_difference_grad(f, x, step=1e-4):
    """Central differences of a scalar function over a flat array."""
    x = np.asarray(x, dtype=np.float64)
    grad = np.zeros_like(x)
    flat = grad.reshape(-1)
    for k in range(x.size):
        plus = x.copy().reshape(-1)
        minus = x.copy().reshape(-1)
        plus[k] += step
        minus[k] -= step
        flat[k] = (f(plus.reshape(x.shape)) - f(minus.reshape(x.shape))) / (2 * step)
    return grad


def grad_close(analytic, numeric, rel_tol=1e-3) -> bool:
    """Relative comparison with an absolute floor for near-zero entries."""
    analytic = np.asarray(analytic, dtype=np.float64).reshape(-1)
    numeric = np.asarray(numeric, dtype=np.float64).reshape(-1)
    scale = np.maximum(np.abs(analytic), np.abs(numeric))
    err = np.abs(analytic - numeric)
    return bool(np.all(err <= rel_tol * np.maximum(scale, 1e-4)))


# --------------------------------------------------------------- evaluation


def search_eval_ref(query_identity, entries, gallery_gt, iou_threshold=0.5):
    """Enumerate one query's ranking and score it.

    entries: (image_id, box_index, box, similarity) tuples in any order;
    gallery_gt: image_id -> list of (box, identity) over the gallery.
    Each ranked entry claims the best still-unclaimed ground-truth box
    of the query identity in its image at IoU >= iou_threshold. Returns
    (ap, top1) with AP integrated from the precision/recall points.
    """
    relevant = [
        (image_id, slot)
        for image_id, anns in gallery_gt.items()
        for slot, (_, identity) in enumerate(anns)
        if identity == query_identity
    ]
    if not relevant:
        raise ValueError("query identity absent from gallery")

    ranked = sorted(entries, key=lambda e: (-e[3], e[0], e[1]))
    claimed = set()
    labels = []
    for image_id, _, box, _ in ranked:
        hit = None
        hit_iou = iou_threshold
        for slot, (gt_box, identity) in enumerate(gallery_gt.get(image_id, [])):
            if identity != query_identity or (image_id, slot) in claimed:
                continue
            overlap = iou_ref(box, gt_box)
            if overlap >= hit_iou:
                hit, hit_iou = slot, overlap
        if hit is None:
            labels.append(0)
        else:
            claimed.add((image_id, hit))
            labels.append(1)

    precisions, recalls = [], []
    tp = 0
    for rank, label in enumerate(labels, start=1):
        tp += label
        precisions.append(tp / rank)
        recalls.append(tp / len(relevant))
    ap = 0.0
    prev_recall = 0.0
    for p, r in zip(precisions, recalls):
        ap += p * (r - prev_recall)
        prev_recall = r
    top1 = 1.0 if labels and labels[0] else 0.0
    return ap, top1
