"""Deterministic ranking of gallery candidates for one query."""

from __future__ import annotations

from dataclasses import dataclass


@dataclass(frozen=True)
class GalleryCandidate:
    """One detection inside one gallery image, scored against a query.

    box_index is the detection's position within its own image's output
    list; together with image_id it makes tie-breaking reproducible.
    """

    image_id: str
    box_index: int
    box: tuple[float, float, float, float]
    similarity: float


def rank_gallery(candidates: list[GalleryCandidate]) -> list[GalleryCandidate]:
    """Sort by similarity descending; ties by image id, then box index."""
    return sorted(candidates, key=lambda c: (-c.similarity, c.image_id, c.box_index))
