"""Dice, IoU and HD95 between binary masks, with brute-force oracles."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from typing import List, Optional, Sequence, Tuple

import numpy as np

from boundary_sdf.distance import squared_edt
from boundary_sdf.errors import DimensionMismatchError, EmptyBoundaryError
from boundary_sdf.grid import BinaryMask


@dataclass(frozen=True)
class MetricsReport:
    dice: float
    iou: float
    hd95: Optional[float]  # None when either boundary set is empty
    fg_pixels_a: int
    fg_pixels_b: int

    @property
    def hd95_defined(self) -> bool:
        return self.hd95 is not None

    def as_dict(self) -> dict:
        return asdict(self)


def _counts(a: BinaryMask, b: BinaryMask) -> Tuple[int, int, int]:
    if a.shape != b.shape:
        raise DimensionMismatchError(f"mask shapes differ: {a.shape} vs {b.shape}")
    fa, fb = a.foreground, b.foreground
    return int(fa.sum()), int(fb.sum()), int((fa & fb).sum())


def dice(a: BinaryMask, b: BinaryMask) -> float:
    """2|A and B| / (|A| + |B|); two empty masks score 1.0."""
    na, nb, inter = _counts(a, b)
    if na + nb == 0:
        return 1.0
    return 2.0 * inter / (na + nb)


def iou(a: BinaryMask, b: BinaryMask) -> float:
    na, nb, inter = _counts(a, b)
    union = na + nb - inter
    if union == 0:
        return 1.0
    return inter / union


def boundary_mask(mask: BinaryMask) -> np.ndarray:
    """Foreground pixels with a 4-neighbour that is background or off-grid."""
    fg = mask.foreground
    padded = np.pad(fg, 1, constant_values=False)
    interior = padded[:-2, 1:-1] & padded[2:, 1:-1] & padded[1:-1, :-2] & padded[1:-1, 2:]
    return fg & ~interior


def boundary_pixels(mask: BinaryMask) -> List[Tuple[int, int]]:
    rows, cols = np.nonzero(boundary_mask(mask))
    return list(zip(rows.tolist(), cols.tolist()))


def percentile(values: Sequence[float], q: float) -> float:
    """Linear-interpolation percentile at rank ``(q/100) * (n - 1)``."""
    v = sorted(float(x) for x in values)
    if not v:
        raise ValueError("percentile of an empty list")
    if not 0 <= q <= 100:
        raise ValueError(f"q must lie in [0, 100], got {q!r}")
    h = (q / 100.0) * (len(v) - 1)
    lo = math.floor(h)
    if lo + 1 >= len(v):
        return v[lo]
    return v[lo] + (h - lo) * (v[lo + 1] - v[lo])


def _directed(src: np.ndarray, dst: np.ndarray) -> np.ndarray:
    """Distances from each ``src`` boundary pixel to the nearest ``dst`` boundary pixel."""
    d2 = squared_edt(dst)
    return np.sqrt(d2[src].astype(np.float64))


def _boundaries(a: BinaryMask, b: BinaryMask) -> Tuple[np.ndarray, np.ndarray]:
    if a.shape != b.shape:
        raise DimensionMismatchError(f"mask shapes differ: {a.shape} vs {b.shape}")
    ba, bb = boundary_mask(a), boundary_mask(b)
    if not ba.any() or not bb.any():
        raise EmptyBoundaryError("HD95 undefined: a mask has an empty boundary")
    return ba, bb


def hd95(a: BinaryMask, b: BinaryMask) -> float:
    """95th percentile of the pooled directed boundary distances, in pixels."""
    ba, bb = _boundaries(a, b)
    pooled = np.concatenate([_directed(ba, bb), _directed(bb, ba)])
    return percentile(pooled.tolist(), 95)


def hausdorff(a: BinaryMask, b: BinaryMask) -> float:
    ba, bb = _boundaries(a, b)
    return float(max(_directed(ba, bb).max(), _directed(bb, ba).max()))


def hd95_brute_force(a: BinaryMask, b: BinaryMask) -> float:
    """All-pairs oracle for :func:`hd95`."""
    ba, bb = _boundaries(a, b)
    pa = np.argwhere(ba).astype(np.float64)
    pb = np.argwhere(bb).astype(np.float64)
    d = np.sqrt(((pa[:, None, :] - pb[None, :, :]) ** 2).sum(axis=2))
    pooled = np.concatenate([d.min(axis=1), d.min(axis=0)])
    return percentile(pooled.tolist(), 95)


def evaluate(a: BinaryMask, b: BinaryMask) -> MetricsReport:
    """All three metrics for one mask pair; undefined HD95 becomes ``None``."""
    try:
        h = hd95(a, b)
    except EmptyBoundaryError:
        h = None
    return MetricsReport(dice(a, b), iou(a, b), h, a.count(), b.count())
