from ctxsearch.losses.detection import cls_loss_first, cls_loss_second, smooth_l1_reg
from ctxsearch.losses.oim import OimState, oim_forward, oim_loss, oim_update
from ctxsearch.losses.total import COMPONENT_NAMES, LossWeights, total_loss

__all__ = [
    "smooth_l1_reg",
    "cls_loss_first",
    "cls_loss_second",
    "OimState",
    "oim_loss",
    "oim_forward",
    "oim_update",
    "COMPONENT_NAMES",
    "LossWeights",
    "total_loss",
]
