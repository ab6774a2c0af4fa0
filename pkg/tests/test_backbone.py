import pytest
import torch

from ctxsearch.detection.backbone import (
    ResNetBackbone,
    ToyBackbone,
    build_backbone,
    extract_backbone,
)
from ctxsearch.errors import ConfigurationError


@pytest.fixture(scope="module")
def resnet():
    torch.manual_seed(0)
    return ResNetBackbone()


def test_resnet_divisible_input(resnet):
    fm = extract_backbone(resnet, torch.randn(3, 256, 256))
    assert fm.stride == 16
    assert fm.data.shape == (1024, 16, 16)


def test_resnet_paper_input_size(resnet):
    # per-layer arithmetic for 900x1500: conv1 s2 p3 -> 450x750,
    # maxpool s2 p1 -> 225x375, stage3 s2 -> 113x188, stage4 s2 -> 57x94
    fm = extract_backbone(resnet, torch.randn(3, 900, 1500))
    assert fm.data.shape == (1024, 57, 94)


def test_resnet_box_head_dim(resnet):
    head = resnet.make_box_head()
    out = head(torch.randn(2, 1024, 14, 14))
    assert out.shape == (2, 2048)
    assert head.out_dim == 2048


def test_resnet_frozen_stem(resnet):
    stem_params = list(resnet.body[0].parameters())
    assert stem_params and all(not p.requires_grad for p in stem_params)
    stage2 = list(resnet.body[5].parameters())
    assert any(p.requires_grad for p in stage2)


def test_toy_shapes():
    torch.manual_seed(1)
    toy = ToyBackbone()
    fm = extract_backbone(toy, torch.randn(3, 64, 64))
    assert fm.stride == 8
    assert fm.data.shape == (128, 8, 8)
    head = toy.make_box_head()
    out = head(torch.randn(5, 128, 4, 4))
    assert out.shape == (5, 256)


def test_toy_box_heads_are_independent():
    torch.manual_seed(2)
    toy = ToyBackbone()
    a, b = toy.make_box_head(), toy.make_box_head()
    assert not torch.equal(a.fc.weight, b.fc.weight)


def test_build_backbone_unknown_profile():
    with pytest.raises(ConfigurationError):
        build_backbone("vgg")


def test_extract_rejects_tiny_image():
    toy = ToyBackbone()
    with pytest.raises(ConfigurationError):
        extract_backbone(toy, torch.randn(3, 4, 4))


def test_extract_rejects_bad_shape():
    toy = ToyBackbone()
    with pytest.raises(ConfigurationError):
        extract_backbone(toy, torch.randn(1, 64, 64))
