import math

import pytest
import torch

from ctxsearch.context.nae import NormAwareEmbedding, nae_embed
from ctxsearch.errors import DegenerateInputWarning


@pytest.fixture()
def nae():
    return NormAwareEmbedding()


def test_three_four_five(nae):
    unit, score = nae(torch.tensor([3.0, 4.0]))
    assert torch.allclose(unit, torch.tensor([0.6, 0.8]))
    # identity affine: score is sigmoid of the norm
    assert float(score) == pytest.approx(1 / (1 + math.exp(-5.0)), abs=1e-6)
    assert float(score) == pytest.approx(0.9933, abs=1e-4)


def test_direction_is_scale_invariant(nae):
    x = torch.randn(4, 16)
    u1, _ = nae(x)
    u2, _ = nae(x * 37.5)
    assert torch.allclose(u1, u2, atol=1e-6)


def test_score_grows_with_norm(nae):
    x = torch.ones(1, 8)
    _, small = nae(x)
    _, big = nae(x * 10)
    assert float(big) > float(small)


def test_unit_norm_output(nae):
    x = torch.randn(32, 24)
    unit, score = nae(x)
    assert torch.allclose(unit.norm(dim=1), torch.ones(32), atol=1e-6)
    assert bool((score > 0).all()) and bool((score < 1).all())


def test_batched_and_single_agree(nae):
    x = torch.randn(5, 12)
    batched_unit, batched_score = nae(x)
    single_unit, single_score = nae(x[2])
    assert torch.equal(single_unit, batched_unit[2])
    assert torch.equal(single_score, batched_score[2])


def test_zero_vector_warns(nae):
    with pytest.warns(DegenerateInputWarning):
        unit, score = nae(torch.zeros(6))
    assert torch.equal(unit, torch.zeros(6))
    assert float(score) == pytest.approx(0.5)


def test_zero_vector_allowed_when_flagged(nae):
    import warnings

    with warnings.catch_warnings():
        warnings.simplefilter("error")
        unit, _ = nae(torch.zeros(2, 6), allow_zero=True)
    assert torch.equal(unit, torch.zeros(2, 6))


def test_rank_three_rejected(nae):
    with pytest.raises(ValueError):
        nae(torch.randn(2, 3, 4))


def test_functional_wrapper(nae):
    x = torch.randn(3, 8)
    u1, s1 = nae_embed(nae, x)
    u2, s2 = nae(x)
    assert torch.equal(u1, u2) and torch.equal(s1, s2)


def test_learned_affine_shifts_score():
    nae = NormAwareEmbedding()
    with torch.no_grad():
        nae.scale.fill_(0.0)
        nae.shift.fill_(2.0)
    _, score = nae(torch.tensor([3.0, 4.0]))
    assert float(score) == pytest.approx(1 / (1 + math.exp(-2.0)), abs=1e-6)
