import warnings

import pytest

from ctxsearch.data.protocol import build_protocol
from ctxsearch.data.types import BoxAnnotation, DatasetIndex, ImageSample
from ctxsearch.errors import ConfigurationError, ProtocolWarning


def _index(annotations, num_images=6, split="test"):
    images = [
        ImageSample(image_id=f"im{k}", height=32, width=32)
        for k in range(num_images)
    ]
    identities = sorted({a.identity for a in annotations if a.identity >= 0})
    return DatasetIndex(
        name="tiny", split=split, images=images,
        annotations=annotations, identities=identities,
    )


def _ann(image, identity, offset=0.0):
    return BoxAnnotation(
        image_id=image, box=(1.0 + offset, 1.0, 9.0 + offset, 9.0), identity=identity
    )


def test_positives_always_in_gallery():
    anns = [_ann("im0", 0), _ann("im1", 0), _ann("im2", 0), _ann("im3", 1), _ann("im4", 1)]
    protocol = build_protocol(_index(anns), gallery_size=2, seed=0)
    for query, gallery in zip(protocol.queries, protocol.galleries):
        positives = {a.image_id for a in anns
                     if a.identity == query.identity and a.image_id != query.image_id}
        assert positives <= set(gallery)


def test_query_image_never_in_its_gallery():
    anns = [_ann("im0", 0), _ann("im1", 0), _ann("im2", 1), _ann("im3", 1)]
    protocol = build_protocol(_index(anns))
    for query, gallery in zip(protocol.queries, protocol.galleries):
        assert query.image_id not in gallery


def test_single_sighting_identity_is_not_a_query():
    anns = [_ann("im0", 0), _ann("im1", 0), _ann("im2", 7)]
    protocol = build_protocol(_index(anns))
    assert all(q.identity != 7 for q in protocol.queries)
    assert len(protocol.queries) == 2


def test_saturated_gallery_size_means_whole_set():
    anns = [_ann("im0", 0), _ann("im1", 0)]
    protocol = build_protocol(_index(anns, num_images=4), gallery_size=100)
    assert protocol.gallery_size is None
    assert all(len(g) == 3 for g in protocol.galleries)


def test_gallery_enlarged_to_fit_positives_warns():
    anns = [_ann(f"im{k}", 0) for k in range(5)]
    with pytest.warns(ProtocolWarning):
        protocol = build_protocol(_index(anns, num_images=5), gallery_size=2)
    # four positive images exceed the nominal size of two
    assert all(len(g) == 4 for g in protocol.galleries)


def test_distractors_fill_to_gallery_size():
    anns = [_ann("im0", 0), _ann("im1", 0), _ann("im2", 1), _ann("im3", 1)]
    protocol = build_protocol(_index(anns, num_images=10), gallery_size=5, seed=3)
    for gallery in protocol.galleries:
        assert len(gallery) == 5


def test_seed_determinism_and_variation():
    anns = [_ann("im0", 0), _ann("im1", 0)]
    a = build_protocol(_index(anns, num_images=30), gallery_size=6, seed=1)
    b = build_protocol(_index(anns, num_images=30), gallery_size=6, seed=1)
    c = build_protocol(_index(anns, num_images=30), gallery_size=6, seed=2)
    assert a.galleries == b.galleries
    assert a.galleries != c.galleries


def test_queries_sorted_by_image_then_box():
    anns = [
        _ann("im2", 0), _ann("im0", 1, offset=4.0), _ann("im0", 1),
        _ann("im1", 0), _ann("im3", 1),
    ]
    protocol = build_protocol(_index(anns))
    keys = [(q.image_id, q.box) for q in protocol.queries]
    assert keys == sorted(keys)


def test_unlabeled_boxes_are_not_queries():
    anns = [_ann("im0", 0), _ann("im1", 0), _ann("im2", -1)]
    protocol = build_protocol(_index(anns))
    assert len(protocol.queries) == 2


def test_train_split_rejected():
    anns = [_ann("im0", 0), _ann("im1", 0)]
    with pytest.raises(ConfigurationError):
        build_protocol(_index(anns, split="train"))


def test_nonpositive_gallery_size_rejected():
    anns = [_ann("im0", 0), _ann("im1", 0)]
    with pytest.raises(ConfigurationError):
        build_protocol(_index(anns), gallery_size=0)


def test_no_warning_when_positives_fit():
    anns = [_ann("im0", 0), _ann("im1", 0)]
    with warnings.catch_warnings():
        warnings.simplefilter("error", ProtocolWarning)
        build_protocol(_index(anns, num_images=8), gallery_size=4)
