"""Pixel-space gradient descent on SDF predictions, for comparing losses.

Each run starts from a perturbed ground-truth SDF and takes fixed steps
``pred <- pred - lr * dL/dpred``.  Weights are computed once from the
ground truth and never updated.  Every ``eval_every`` steps the prediction
is thresholded at zero and scored against the ground-truth mask.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Union

import numpy as np

from boundary_sdf.distance import signed_distance, to_pixel_units
from boundary_sdf.errors import DimensionMismatchError, DivergenceError, NormalizationError, ToolkitError
from boundary_sdf.grid import BinaryMask, SdfMap
from boundary_sdf.losses import (
    LossParams,
    check_consistency,
    focus_grad_array,
    focus_terms,
    weights_from_array,
)
from boundary_sdf import metrics
from boundary_sdf.synth import PerturbSpec, ShapeSpec, generate, perturb_sdf

LOSS_KINDS = ("focus_sdf", "uniform_lp")
CSV_HEADER = ["config", "step", "loss_total", "weighted_term", "gradient_term", "dice", "iou", "hd95"]


@dataclass(frozen=True)
class DescentConfig:
    name: str = "focus_sdf"
    steps: int = 500
    learning_rate: float = 100.0
    loss: str = "focus_sdf"
    params: LossParams = field(default_factory=LossParams)
    eval_every: int = 10

    def __post_init__(self):
        if self.loss not in LOSS_KINDS:
            raise ValueError(f"loss must be one of {LOSS_KINDS}, got {self.loss!r}")
        if self.steps < 1:
            raise ValueError("steps must be >= 1")
        if self.eval_every < 1:
            raise ValueError("eval_every must be >= 1")
        if not (math.isfinite(self.learning_rate) and self.learning_rate > 0):
            raise ValueError("learning_rate must be finite and positive")


@dataclass(frozen=True)
class TrajectoryPoint:
    step: int
    loss_total: float
    weighted_term: float
    gradient_term: float
    dice: float
    iou: float
    hd95: Optional[float]


def _zero_level(sdf: SdfMap) -> float:
    """Threshold that corresponds to 0 px in the map's own units."""
    if sdf.normalized:
        mean, std = sdf.norm_params
        return -mean / std
    return 0.0


def _score(pred: np.ndarray, level: float, gt_mask: BinaryMask):
    report = metrics.evaluate(BinaryMask((pred < level).astype(np.uint8)), gt_mask)
    return report.dice, report.iou, report.hd95


def descend(init: SdfMap, gt: SdfMap, gt_mask: BinaryMask, config: DescentConfig) -> List[TrajectoryPoint]:
    if init.shape != gt.shape or gt.shape != gt_mask.shape:
        raise DimensionMismatchError(
            f"shapes differ: init {init.shape}, gt {gt.shape}, mask {gt_mask.shape}"
        )
    if init.normalized != gt.normalized:
        raise NormalizationError("init and gt must be in the same units")
    check_consistency(gt_mask, gt)

    params = config.params
    target = gt.data
    if config.loss == "focus_sdf":
        w = weights_from_array(to_pixel_units(gt).data, params.gamma)
        lam = params.lam
    else:
        w = np.ones_like(target)
        lam = 0.0
    level = _zero_level(gt)
    lr = config.learning_rate

    pred = np.array(init.data, dtype=np.float64)
    out: List[TrajectoryPoint] = []
    # overflow is caught explicitly as DivergenceError below
    with np.errstate(over="ignore", invalid="ignore"):
        for step in range(config.steps + 1):
            weighted, gradient = focus_terms(pred, target, w, params.p)
            total = weighted + lam * gradient
            if not math.isfinite(total):
                raise DivergenceError(step)
            if step % config.eval_every == 0 or step == config.steps:
                d, j, h = _score(pred, level, gt_mask)
                out.append(TrajectoryPoint(step, total, weighted, gradient, d, j, h))
            if step < config.steps:
                pred -= lr * focus_grad_array(pred, target, w, params.p, lam)
    return out


def quadratic_stability_bound(n_pixels: int) -> float:
    """Largest stable step for uniform p=2, lam=0 descent: each step scales
    the residual by ``1 - 2 lr / n``, which contracts iff ``lr < n``."""
    return float(n_pixels)


@dataclass
class ConfigResult:
    config: DescentConfig
    trajectory: List[TrajectoryPoint] = field(default_factory=list)
    error: Optional[str] = None

    @property
    def final(self) -> Optional[TrajectoryPoint]:
        return self.trajectory[-1] if self.trajectory else None


@dataclass
class ComparisonReport:
    shape: ShapeSpec
    perturb: PerturbSpec
    initial_dice: float
    initial_iou: float
    initial_hd95: Optional[float]
    results: List[ConfigResult]

    def result(self, name: str) -> ConfigResult:
        for r in self.results:
            if r.config.name == name:
                return r
        raise KeyError(name)

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(CSV_HEADER)
        for r in self.results:
            for pt in r.trajectory:
                writer.writerow(
                    [
                        r.config.name,
                        pt.step,
                        fmt_float(pt.loss_total),
                        fmt_float(pt.weighted_term),
                        fmt_float(pt.gradient_term),
                        fmt_float(pt.dice),
                        fmt_float(pt.iou),
                        "" if pt.hd95 is None else fmt_float(pt.hd95),
                    ]
                )
        return buf.getvalue()

    def summary_table(self) -> str:
        def cell(v):
            return "undef" if v is None else f"{v:.6g}"

        rows = [("config", "loss0", "lossN", "dice", "iou", "hd95")]
        rows.append(
            ("initial", "", "", cell(self.initial_dice), cell(self.initial_iou), cell(self.initial_hd95))
        )
        for r in self.results:
            if r.error is not None:
                rows.append((r.config.name, "error", r.error, "", "", ""))
                continue
            first, last = r.trajectory[0], r.trajectory[-1]
            rows.append(
                (
                    r.config.name,
                    cell(first.loss_total),
                    cell(last.loss_total),
                    cell(last.dice),
                    cell(last.iou),
                    cell(last.hd95),
                )
            )
        widths = [max(len(row[i]) for row in rows) for i in range(len(rows[0]))]
        return "\n".join("  ".join(c.ljust(wd) for c, wd in zip(row, widths)).rstrip() for row in rows)


def fmt_float(x: float) -> str:
    return format(float(x), ".17g")


def compare(shape: ShapeSpec, perturb: PerturbSpec, configs: Sequence[DescentConfig]) -> ComparisonReport:
    """Run every config from the same perturbed start.

    A config that fails is recorded with its error; the others still run.
    """
    if not configs:
        raise ValueError("compare needs at least one config")
    budgets = {(c.steps, c.learning_rate) for c in configs}
    if len(budgets) != 1:
        raise ValueError("all configs must share steps and learning_rate")
    names = [c.name for c in configs]
    if len(set(names)) != len(names):
        raise ValueError(f"config names must be unique: {names}")

    gt_mask = generate(shape)
    gt = signed_distance(gt_mask)
    init = perturb_sdf(gt, perturb)
    d0, j0, h0 = _score(init.data, 0.0, gt_mask)

    results = []
    for cfg in configs:
        try:
            results.append(ConfigResult(cfg, descend(init, gt, gt_mask, cfg)))
        except ToolkitError as exc:
            results.append(ConfigResult(cfg, error=f"{type(exc).__name__}: {exc}"))
    return ComparisonReport(shape, perturb, d0, j0, h0, results)
