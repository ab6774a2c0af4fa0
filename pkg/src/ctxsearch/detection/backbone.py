"""Backbones producing the shared strided feature map.

Two profiles share one interface: a ResNet50 split after its fourth stage
(stride 16, 1024 channels; the fifth stage is instantiated per detection
head and applied to pooled regions), and a small stride-8 network for
desk-scale runs. Each head gets its own independently-initialized box head
via make_box_head().
"""

from __future__ import annotations

from dataclasses import dataclass

import torch
from torch import nn
from torchvision.models import resnet50
from torchvision.ops.misc import FrozenBatchNorm2d

from ctxsearch.errors import ConfigurationError


@dataclass
class FeatureMap:
    data: torch.Tensor  # [channels, h', w']
    stride: int


class _Res5BoxHead(nn.Module):
    """Fifth ResNet stage over pooled regions, then global average pooling."""

    def __init__(self, stage: nn.Module, out_dim: int):
        super().__init__()
        self.stage = stage
        self.out_dim = out_dim

    def forward(self, rois: torch.Tensor) -> torch.Tensor:
        x = self.stage(rois)
        return x.mean(dim=(2, 3))


class _MlpBoxHead(nn.Module):
    """Flatten pooled regions into a small fully-connected feature."""

    def __init__(self, in_features: int, out_dim: int):
        super().__init__()
        self.fc = nn.Linear(in_features, out_dim)
        self.out_dim = out_dim

    def forward(self, rois: torch.Tensor) -> torch.Tensor:
        return torch.relu(self.fc(rois.flatten(1)))


class ResNetBackbone(nn.Module):
    stride = 16
    out_channels = 1024
    roi_resolution = 14

    def __init__(self, weights_path: str | None = None):
        super().__init__()
        net = self._build(weights_path)
        self.body = nn.Sequential(
            net.conv1, net.bn1, net.relu, net.maxpool,
            net.layer1, net.layer2, net.layer3,
        )
        # stem and first stage stay fixed, as is standard for detection
        for idx in (0, 1, 4):
            for p in self.body[idx].parameters():
                p.requires_grad_(False)
        self._weights_path = weights_path

    @staticmethod
    def _build(weights_path):
        net = resnet50(norm_layer=FrozenBatchNorm2d)
        if weights_path:
            state = torch.load(weights_path, map_location="cpu", weights_only=True)
            net.load_state_dict(state)
        return net

    def forward(self, images: torch.Tensor) -> torch.Tensor:
        return self.body(images)

    def make_box_head(self) -> nn.Module:
        return _Res5BoxHead(self._build(self._weights_path).layer4, out_dim=2048)


class ToyBackbone(nn.Module):
    """Small stride-8 backbone for desk-scale tests; receptive field is kept
    narrow so region features stay person-centric."""

    stride = 8
    roi_resolution = 4

    def __init__(self, channels: int = 128):
        super().__init__()
        self.out_channels = channels
        self.body = nn.Sequential(
            nn.Conv2d(3, 32, 5, stride=2, padding=2),
            nn.BatchNorm2d(32),
            nn.ReLU(inplace=True),
            nn.Conv2d(32, 64, 3, stride=2, padding=1),
            nn.BatchNorm2d(64),
            nn.ReLU(inplace=True),
            nn.MaxPool2d(2, stride=2),
            nn.Conv2d(64, channels, 1),
            nn.BatchNorm2d(channels),
            nn.ReLU(inplace=True),
        )

    def forward(self, images: torch.Tensor) -> torch.Tensor:
        return self.body(images)

    def make_box_head(self) -> nn.Module:
        in_features = self.out_channels * self.roi_resolution ** 2
        return _MlpBoxHead(in_features, out_dim=256)


def build_backbone(profile: str, weights_path: str | None = None,
                   toy_channels: int = 128):
    if profile == "resnet50":
        return ResNetBackbone(weights_path)
    if profile == "toy":
        return ToyBackbone(toy_channels)
    raise ConfigurationError(f"unknown backbone profile {profile!r}")


def extract_backbone(backbone: nn.Module, image: torch.Tensor) -> FeatureMap:
    """Run one [3, H, W] image through a backbone into a FeatureMap."""
    if image.ndim != 3 or image.shape[0] != 3:
        raise ConfigurationError(f"expected a [3, H, W] image, got {tuple(image.shape)}")
    _, h, w = image.shape
    if h < backbone.stride or w < backbone.stride:
        raise ConfigurationError(
            f"image {h}x{w} smaller than the backbone stride {backbone.stride}"
        )
    data = backbone(image[None])[0]
    return FeatureMap(data=data, stride=backbone.stride)
