from ctxsearch.engine.config import TrainConfig, load_config, save_config
from ctxsearch.engine.schedule import lr_at, lr_for_epoch
from ctxsearch.engine.augment import horizontal_flip_boxes, maybe_flip
from ctxsearch.engine.transforms import resize_to_range, to_input_tensor
from ctxsearch.engine.checkpoint import load_checkpoint, save_checkpoint
from ctxsearch.engine.trainer import Trainer, build_model
from ctxsearch.engine.inference import detect_images, embeddings_at_boxes, gt_box_embeddings

__all__ = [
    "TrainConfig",
    "load_config",
    "save_config",
    "lr_at",
    "lr_for_epoch",
    "horizontal_flip_boxes",
    "maybe_flip",
    "resize_to_range",
    "to_input_tensor",
    "load_checkpoint",
    "save_checkpoint",
    "Trainer",
    "build_model",
    "detect_images",
    "embeddings_at_boxes",
    "gt_box_embeddings",
]
