from ctxsearch.detection.boxes import (
    Detection,
    TargetAssignment,
    assign_targets,
    box_iou_matrix,
    clip_boxes,
    decode_deltas,
    encode_deltas,
    iou,
    nms,
    nms_indices,
)
from ctxsearch.detection.roi import roi_extract
from ctxsearch.detection.backbone import (
    FeatureMap,
    ResNetBackbone,
    ToyBackbone,
    build_backbone,
    extract_backbone,
)
from ctxsearch.detection.anchors import anchor_shapes, grid_anchors
from ctxsearch.detection.rpn import ProposalNetwork, RpnOutput
from ctxsearch.detection.heads import FirstHead, SecondHead

__all__ = [
    "Detection",
    "TargetAssignment",
    "assign_targets",
    "box_iou_matrix",
    "clip_boxes",
    "decode_deltas",
    "encode_deltas",
    "iou",
    "nms",
    "nms_indices",
    "roi_extract",
    "FeatureMap",
    "ResNetBackbone",
    "ToyBackbone",
    "build_backbone",
    "extract_backbone",
    "anchor_shapes",
    "grid_anchors",
    "ProposalNetwork",
    "RpnOutput",
    "FirstHead",
    "SecondHead",
]
