"""FocusSDF loss, its weight map and gradients, and comparator losses.

The loss over SDF maps ``S`` (ground truth) and ``S_hat`` (prediction) is::

    mean_i w_i |S_i - S_hat_i|**p
      + lam * mean_i (|dx(S - S_hat)_i|**p + |dy(S - S_hat)_i|**p)

with ``w_i = 1`` inside the object and ``exp(-gamma |S_i|)`` outside, and
``dx``/``dy`` forward differences that are zero on the last column/row.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np

from boundary_sdf.distance import to_pixel_units
from boundary_sdf.errors import ConsistencyError, DimensionMismatchError, NormalizationError
from boundary_sdf.grid import BinaryMask, SdfMap

DEFAULT_GAMMA = 0.005
DEFAULT_LAMBDA = 1.0
DEFAULT_P = 1
DEFAULT_DICE_WEIGHT = 1.0
DEFAULT_SMOOTH = 1.0


@dataclass(frozen=True)
class LossParams:
    gamma: float = DEFAULT_GAMMA
    lam: float = DEFAULT_LAMBDA
    p: int = DEFAULT_P
    dice_weight: float = DEFAULT_DICE_WEIGHT
    dice_smooth: float = DEFAULT_SMOOTH

    def __post_init__(self):
        for name in ("gamma", "lam", "dice_weight"):
            value = getattr(self, name)
            if not (np.isfinite(value) and value >= 0):
                raise ValueError(f"{name} must be a finite value >= 0, got {value!r}")
        if self.p not in (1, 2):
            raise ValueError(f"p must be 1 or 2, got {self.p!r}")
        if not (np.isfinite(self.dice_smooth) and self.dice_smooth > 0):
            raise ValueError(f"dice_smooth must be > 0, got {self.dice_smooth!r}")


@dataclass(frozen=True, eq=False)
class WeightMap:
    """Per-pixel weights in (0, 1]."""

    data: np.ndarray

    @property
    def shape(self) -> Tuple[int, int]:
        return self.data.shape


@dataclass(frozen=True, eq=False)
class GradPair:
    gx: np.ndarray
    gy: np.ndarray


@dataclass(frozen=True)
class LossBreakdown:
    weighted_term: float
    gradient_term: float
    total: float
    dice_term: Optional[float] = None

    def as_dict(self) -> dict:
        out = {
            "total": self.total,
            "weighted_term": self.weighted_term,
            "gradient_term": self.gradient_term,
        }
        if self.dice_term is not None:
            out["dice_term"] = self.dice_term
        return out


def _check_shapes(*arrays) -> None:
    shapes = {np.shape(a) for a in arrays}
    if len(shapes) != 1:
        raise DimensionMismatchError(f"grid dimensions differ: {sorted(shapes)}")


def _check_units(pred: SdfMap, gt: SdfMap) -> None:
    if pred.normalized != gt.normalized:
        raise NormalizationError("pred and gt must both be normalized or both in pixel units")


# -- array kernels --------------------------------------------------------


def weights_from_array(gt: np.ndarray, gamma: float) -> np.ndarray:
    return np.where(gt > 0, np.exp(-gamma * np.abs(gt)), 1.0)


def forward_diff(v: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    gx = np.zeros_like(v)
    gy = np.zeros_like(v)
    gx[:, :-1] = v[:, 1:] - v[:, :-1]
    gy[:-1, :] = v[1:, :] - v[:-1, :]
    return gx, gy


def forward_diff_adjoint(ux: np.ndarray, uy: np.ndarray) -> np.ndarray:
    """Transpose of :func:`forward_diff` applied to ``(ux, uy)``."""
    out = np.zeros_like(ux)
    out[:, 1:] += ux[:, :-1]
    out[:, :-1] -= ux[:, :-1]
    out[1:, :] += uy[:-1, :]
    out[:-1, :] -= uy[:-1, :]
    return out


def _pow(x: np.ndarray, p: int) -> np.ndarray:
    return np.abs(x) if p == 1 else x * x


def _dpow(x: np.ndarray, p: int) -> np.ndarray:
    # d|x|^p/dx, with subgradient 0 at x = 0 for p = 1
    return np.sign(x) if p == 1 else 2.0 * x


def focus_terms(pred: np.ndarray, gt: np.ndarray, w: np.ndarray, p: int) -> Tuple[float, float]:
    """(weighted_term, gradient_term) for raw arrays."""
    n = gt.size
    diff = gt - pred
    weighted = float(np.sum(w * _pow(diff, p))) / n
    dx, dy = forward_diff(diff)
    gradient = float(np.sum(_pow(dx, p)) + np.sum(_pow(dy, p))) / n
    return weighted, gradient


def focus_grad_array(pred: np.ndarray, gt: np.ndarray, w: np.ndarray, p: int, lam: float) -> np.ndarray:
    n = gt.size
    resid = pred - gt
    grad = w * _dpow(resid, p) / n
    if lam:
        rx, ry = forward_diff(resid)
        grad = grad + (lam / n) * forward_diff_adjoint(_dpow(rx, p), _dpow(ry, p))
    return grad


# -- public operations ----------------------------------------------------


def weight_map(gt: SdfMap, gamma: float) -> WeightMap:
    """Boundary-focused weights from a pixel-unit ground-truth SDF.

    Weight is 1 where the ground truth is <= 0 and ``exp(-gamma * |s|)``
    outside the object, so background pixels lose influence with distance.
    """
    if gt.normalized:
        raise NormalizationError("weight_map needs pixel-unit distances; denormalize first")
    if not (np.isfinite(gamma) and gamma >= 0):
        raise ValueError(f"gamma must be >= 0, got {gamma!r}")
    return WeightMap(weights_from_array(gt.data, gamma))


def spatial_gradient(sdf: SdfMap) -> GradPair:
    gx, gy = forward_diff(sdf.data)
    return GradPair(gx, gy)


def focus_sdf_loss(pred: SdfMap, gt: SdfMap, weights: WeightMap, params: LossParams) -> LossBreakdown:
    _check_shapes(pred.data, gt.data, weights.data)
    _check_units(pred, gt)
    if not np.all(np.isfinite(weights.data)):
        raise ValueError("weights must be finite")
    weighted, gradient = focus_terms(pred.data, gt.data, weights.data, params.p)
    return LossBreakdown(weighted, gradient, weighted + params.lam * gradient)


def focus_sdf_grad(pred: SdfMap, gt: SdfMap, weights: WeightMap, params: LossParams) -> np.ndarray:
    """Analytic derivative of the total loss with respect to each ``pred`` pixel."""
    _check_shapes(pred.data, gt.data, weights.data)
    _check_units(pred, gt)
    return focus_grad_array(pred.data, gt.data, weights.data, params.p, params.lam)


def soft_dice_loss(prob, mask: BinaryMask, smooth: float = DEFAULT_SMOOTH) -> Tuple[float, np.ndarray]:
    """Soft Dice ``1 - (2 sum(p g) + s) / (sum(p) + sum(g) + s)`` and its gradient."""
    prob = np.asarray(prob, dtype=np.float64)
    _check_shapes(prob, mask.data)
    if not np.all((prob >= 0) & (prob <= 1)):
        raise ValueError("probabilities must lie in [0, 1]")
    if not smooth > 0:
        raise ValueError("smooth must be > 0")
    g = mask.data.astype(np.float64)
    inter = float(np.sum(prob * g))
    denom = float(np.sum(prob)) + float(np.sum(g)) + smooth
    numer = 2.0 * inter + smooth
    loss = 1.0 - numer / denom
    grad = -(2.0 * g * denom - numer) / (denom * denom)
    return loss, grad


def check_consistency(mask: BinaryMask, gt: SdfMap) -> None:
    _check_shapes(mask.data, gt.data)
    px = to_pixel_units(gt).data
    if not np.array_equal(px < 0, mask.foreground):
        raise ConsistencyError("ground-truth SDF sign partition does not match the mask")


def combined_loss(
    prob, mask: BinaryMask, pred_sdf: SdfMap, gt_sdf: SdfMap, params: LossParams
) -> LossBreakdown:
    """Joint mask + SDF objective: FocusSDF total plus ``dice_weight`` x soft Dice.

    Weights always come from the pixel-unit ground truth, so a normalized
    ``gt_sdf`` is denormalized through its recorded parameters first.
    """
    check_consistency(mask, gt_sdf)
    weights = weight_map(to_pixel_units(gt_sdf), params.gamma)
    focus = focus_sdf_loss(pred_sdf, gt_sdf, weights, params)
    dice_term, _ = soft_dice_loss(prob, mask, params.dice_smooth)
    total = focus.total + params.dice_weight * dice_term
    return LossBreakdown(focus.weighted_term, focus.gradient_term, total, dice_term)


def uniform_lp_loss(pred: SdfMap, gt: SdfMap, p: int) -> float:
    """Mean ``|S - S_hat|**p`` with equal weight on every pixel."""
    _check_shapes(pred.data, gt.data)
    if p not in (1, 2):
        raise ValueError(f"p must be 1 or 2, got {p!r}")
    return float(np.sum(_pow(gt.data - pred.data, p))) / gt.data.size
