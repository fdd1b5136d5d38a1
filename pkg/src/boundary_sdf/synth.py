"""Seeded synthetic masks and SDF perturbations.

Randomness comes from numpy's ``Generator`` over the PCG64 bit generator,
seeded directly from the 64-bit shape or perturbation seed, so outputs depend on the seed
alone.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Dict, Tuple

import numpy as np

from boundary_sdf.errors import DegenerateGeometryError, NormalizationError
from boundary_sdf.grid import BinaryMask, SdfMap

SHAPE_KINDS = ("disk", "annulus", "curve", "multi_blob")


def make_rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(int(seed) & 0xFFFFFFFFFFFFFFFF))


@dataclass(frozen=True)
class ShapeSpec:
    """Shape description.

    ``params`` per kind (all optional, in pixels):

    * disk: ``center`` (row, col), ``radius``
    * annulus: ``center``, ``r_out``, and ``r_in`` or ``thickness``
    * curve: ``points`` (control-point count), ``half_width``, ``margin``
    * multi_blob: ``count``, ``r_min``, ``r_max``
    """

    kind: str
    size: Tuple[int, int] = (64, 64)
    params: Dict[str, Any] = field(default_factory=dict)
    seed: int = 0

    def __post_init__(self):
        if self.kind not in SHAPE_KINDS:
            raise ValueError(f"unknown shape kind {self.kind!r}; expected one of {SHAPE_KINDS}")
        h, w = self.size
        if h < 1 or w < 1:
            raise ValueError(f"size must be positive, got {self.size}")
        object.__setattr__(self, "size", (int(h), int(w)))


@dataclass(frozen=True)
class PerturbSpec:
    noise_sigma: float = 0.0
    bias: float = 0.0
    smooth_radius: int = 0
    seed: int = 0

    def __post_init__(self):
        if not (np.isfinite(self.noise_sigma) and self.noise_sigma >= 0):
            raise ValueError(f"noise_sigma must be finite and >= 0, got {self.noise_sigma!r}")
        if not np.isfinite(self.bias):
            raise ValueError("bias must be finite")
        if self.smooth_radius < 0:
            raise ValueError("smooth_radius must be >= 0")


def _center_dist(shape, center) -> np.ndarray:
    rr, cc = np.indices(shape, dtype=np.float64)
    return np.hypot(rr - center[0], cc - center[1])


def _default_center(shape) -> Tuple[float, float]:
    return (shape[0] // 2, shape[1] // 2)


def _segment_dist(shape, p0, p1) -> np.ndarray:
    rr, cc = np.indices(shape, dtype=np.float64)
    d = np.subtract(p1, p0, dtype=np.float64)
    length2 = float(d @ d)
    if length2 == 0:
        return np.hypot(rr - p0[0], cc - p0[1])
    t = ((rr - p0[0]) * d[0] + (cc - p0[1]) * d[1]) / length2
    t = np.clip(t, 0.0, 1.0)
    return np.hypot(rr - (p0[0] + t * d[0]), cc - (p0[1] + t * d[1]))


def _disk(spec: ShapeSpec, rng) -> np.ndarray:
    center = spec.params.get("center", _default_center(spec.size))
    radius = float(spec.params.get("radius", min(spec.size) / 4))
    return _center_dist(spec.size, center) <= radius


def _annulus(spec: ShapeSpec, rng) -> np.ndarray:
    p = spec.params
    center = p.get("center", _default_center(spec.size))
    r_out = float(p.get("r_out", min(spec.size) / 3))
    if "r_in" in p:
        r_in = float(p["r_in"])
    else:
        r_in = r_out - float(p.get("thickness", 3))
    dist = _center_dist(spec.size, center)
    return (dist > r_in) & (dist <= r_out)


def _curve(spec: ShapeSpec, rng) -> np.ndarray:
    p = spec.params
    h, w = spec.size
    n_points = int(p.get("points", 4))
    half_width = float(p.get("half_width", 1.5))
    margin = float(p.get("margin", min(h, w) / 8))
    if n_points < 2:
        raise ValueError("curve needs at least 2 control points")
    pts = np.column_stack(
        [rng.uniform(margin, h - 1 - margin, n_points), rng.uniform(margin, w - 1 - margin, n_points)]
    )
    dist = np.full(spec.size, np.inf)
    for p0, p1 in zip(pts[:-1], pts[1:]):
        dist = np.minimum(dist, _segment_dist(spec.size, p0, p1))
    return dist <= half_width


def _multi_blob(spec: ShapeSpec, rng) -> np.ndarray:
    p = spec.params
    h, w = spec.size
    count = int(p.get("count", 3))
    r_min = float(p.get("r_min", 2.0))
    r_max = float(p.get("r_max", max(r_min, min(h, w) / 8)))
    out = np.zeros(spec.size, dtype=bool)
    for _ in range(count):
        r = rng.uniform(r_min, r_max)
        center = (rng.uniform(r, h - 1 - r), rng.uniform(r, w - 1 - r))
        out |= _center_dist(spec.size, center) <= r
    return out


_GENERATORS = {"disk": _disk, "annulus": _annulus, "curve": _curve, "multi_blob": _multi_blob}


def generate(spec: ShapeSpec) -> BinaryMask:
    fg = _GENERATORS[spec.kind](spec, make_rng(spec.seed))
    n = int(fg.sum())
    if n == 0 or n == fg.size:
        raise DegenerateGeometryError(f"{spec.kind} with {spec.params} gives a single-class mask")
    return BinaryMask(fg.astype(np.uint8))


def _box_kernel(passes: int) -> np.ndarray:
    k = np.array([1.0])
    for _ in range(passes):
        k = np.convolve(k, np.ones(3) / 3.0)
    return k


def _box_blur(field: np.ndarray, passes: int) -> np.ndarray:
    for _ in range(passes):
        p = np.pad(field, 1, mode="edge")
        field = (p[:-2, :] + p[1:-1, :] + p[2:, :])[:, 1:-1] / 3.0
        p = np.pad(field, 1, mode="edge")
        field = (p[:, :-2] + p[:, 1:-1] + p[:, 2:])[1:-1, :] / 3.0
    return field


def noise_field(shape, sigma: float, passes: int, seed: int) -> np.ndarray:
    """Box-blurred Gaussian noise rescaled to pointwise std ``sigma``.

    The rescale uses the kernel's energy (away-from-edge std), not the
    sample std, so the field is a genuine random draw.
    """
    white = make_rng(seed).standard_normal(shape)
    if passes == 0:
        return sigma * white
    k = _box_kernel(passes)
    gain = float(np.sum(k * k))  # 2-D energy = (1-D energy)**2, so std factor = 1-D energy
    return sigma * _box_blur(white, passes) / gain


def perturb_sdf(gt: SdfMap, spec: PerturbSpec) -> SdfMap:
    """``gt + bias + noise``; positive bias shrinks the thresholded foreground."""
    if gt.normalized:
        raise NormalizationError("perturb_sdf expects a pixel-unit SDF")
    out = gt.data + spec.bias
    if spec.noise_sigma > 0:
        out = out + noise_field(gt.shape, spec.noise_sigma, spec.smooth_radius, spec.seed)
    return SdfMap(out)
