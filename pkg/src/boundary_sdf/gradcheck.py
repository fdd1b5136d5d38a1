"""Central finite-difference checks of the analytic loss gradients."""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Callable

import numpy as np

from boundary_sdf.distance import signed_distance
from boundary_sdf.grid import BinaryMask
from boundary_sdf.losses import (
    focus_grad_array,
    focus_terms,
    forward_diff,
    soft_dice_loss,
    weights_from_array,
)
from boundary_sdf.synth import make_rng

GAMMAS = (0.0, 0.01, 0.1, 1.0)
LAMBDAS = (0.0, 0.5, 1.0)
TOLERANCE = 1e-6
KINK_MARGIN = 1e-3


def central_difference(fn: Callable[[np.ndarray], float], x: np.ndarray, step: float) -> np.ndarray:
    x = np.array(x, dtype=np.float64)
    grad = np.empty_like(x)
    flat, g = x.reshape(-1), grad.reshape(-1)
    for i in range(flat.size):
        orig = flat[i]
        flat[i] = orig + step
        up = fn(x)
        flat[i] = orig - step
        down = fn(x)
        flat[i] = orig
        g[i] = (up - down) / (2.0 * step)
    return grad


def relative_error(analytic: np.ndarray, numeric: np.ndarray, where=None) -> float:
    """Max-norm error scaled by the max-norm of the numeric gradient."""
    a, f = np.asarray(analytic), np.asarray(numeric)
    if where is not None:
        a, f = a[where], f[where]
    if a.size == 0:
        return 0.0
    scale = float(np.max(np.abs(f)))
    err = float(np.max(np.abs(a - f)))
    return err / scale if scale > 0 else err


def random_instance(rng: np.random.Generator, size: int = 16):
    """(pred, gt, gt_mask) with gt a true SDF of a random two-class mask."""
    while True:
        fg = rng.random((size, size)) < rng.uniform(0.2, 0.6)
        if 0 < fg.sum() < fg.size:
            break
    mask = BinaryMask(fg.astype(np.uint8))
    gt = signed_distance(mask).data
    pred = gt + rng.normal(0.0, rng.uniform(0.5, 2.0), gt.shape)
    return pred, gt, mask


def smooth_pixels(pred: np.ndarray, gt: np.ndarray, margin: float = KINK_MARGIN) -> np.ndarray:
    """Pixels where every |.| in the p=1 loss stays away from its kink."""
    r = pred - gt
    rx, ry = forward_diff(r)
    ok = np.abs(r) > margin
    # pixel (i, j) enters rx at (i, j) and (i, j-1), ry at (i, j) and (i-1, j)
    bad_x = (np.abs(rx) <= margin)
    bad_x[:, -1] = False
    bad_y = (np.abs(ry) <= margin)
    bad_y[-1, :] = False
    ok &= ~bad_x
    ok[:, 1:] &= ~bad_x[:, :-1]
    ok &= ~bad_y
    ok[1:, :] &= ~bad_y[:-1, :]
    return ok


def check_focus(pred, gt, gamma: float, lam: float, p: int) -> float:
    w = weights_from_array(gt, gamma)

    def total(x):
        weighted, gradient = focus_terms(x, gt, w, p)
        return weighted + lam * gradient

    step = 1e-5 * max(1.0, float(np.max(np.abs(pred))))
    analytic = focus_grad_array(pred, gt, w, p, lam)
    numeric = central_difference(total, pred, step)
    where = smooth_pixels(pred, gt) if p == 1 else None
    return relative_error(analytic, numeric, where)


def check_dice(rng: np.random.Generator, size: int = 16, smooth: float = 1.0) -> float:
    prob = np.clip(rng.random((size, size)), 0.01, 0.99)
    mask = BinaryMask((rng.random((size, size)) < 0.4).astype(np.uint8))
    _, analytic = soft_dice_loss(prob, mask, smooth)
    numeric = central_difference(lambda x: soft_dice_loss(x, mask, smooth)[0], prob, 1e-5)
    return relative_error(analytic, numeric)


@dataclass(frozen=True)
class GradcheckReport:
    seed: int
    trials: int
    p: int
    max_rel_err_focus: float
    max_rel_err_dice: float
    tolerance: float = TOLERANCE

    @property
    def passed(self) -> bool:
        return self.max_rel_err_focus <= self.tolerance and self.max_rel_err_dice <= self.tolerance


def run_gradcheck(seed: int = 1, trials: int = 50, p: int = 2, size: int = 16) -> GradcheckReport:
    """Check ``trials`` random instances cycling through every (gamma, lam) pair."""
    rng = make_rng(seed)
    grid = itertools.cycle(itertools.product(GAMMAS, LAMBDAS))
    worst_focus = worst_dice = 0.0
    for _ in range(trials):
        gamma, lam = next(grid)
        pred, gt, _ = random_instance(rng, size)
        worst_focus = max(worst_focus, check_focus(pred, gt, gamma, lam, p))
        worst_dice = max(worst_dice, check_dice(rng, size))
    return GradcheckReport(seed, trials, p, worst_focus, worst_dice)
