"""Boundary-aware signed-distance segmentation loss toolkit.

Signed distance maps, the exponentially weighted FocusSDF loss with its
gradient-consistency term and analytic gradients, Dice/IoU/HD95 metrics,
synthetic shapes and a pixel-space descent harness.
"""

from boundary_sdf.distance import (
    brute_force_signed_distance,
    denormalize_sdf,
    edt,
    normalize_sdf,
    signed_distance,
)
from boundary_sdf.grid import (
    BinaryMask,
    SdfMap,
    load_mask,
    load_sdf,
    mask_from_sdf,
    save_mask,
    save_sdf,
)
from boundary_sdf.losses import (
    LossBreakdown,
    LossParams,
    combined_loss,
    focus_sdf_grad,
    focus_sdf_loss,
    soft_dice_loss,
    spatial_gradient,
    uniform_lp_loss,
    weight_map,
)
from boundary_sdf.metrics import MetricsReport, dice, evaluate, hd95, iou

__version__ = "0.1.0"

__all__ = [
    "BinaryMask",
    "SdfMap",
    "LossParams",
    "LossBreakdown",
    "MetricsReport",
    "load_mask",
    "save_mask",
    "load_sdf",
    "save_sdf",
    "mask_from_sdf",
    "edt",
    "signed_distance",
    "brute_force_signed_distance",
    "normalize_sdf",
    "denormalize_sdf",
    "weight_map",
    "spatial_gradient",
    "focus_sdf_loss",
    "focus_sdf_grad",
    "soft_dice_loss",
    "combined_loss",
    "uniform_lp_loss",
    "dice",
    "iou",
    "hd95",
    "evaluate",
]
