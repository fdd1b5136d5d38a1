"""Exact Euclidean distance transforms and signed distance maps.

The transform runs the lower envelope of parabolas (Felzenszwalb and
Huttenlocher) once along columns and once along rows on integer squared
distances, so results are exact until the final square root.
"""

from __future__ import annotations

import numpy as np

from boundary_sdf.errors import (
    DegenerateMapError,
    EmptyForegroundError,
    NormalizationError,
    SingleClassMaskError,
)
from boundary_sdf.grid import BinaryMask, SdfMap


def _envelope_1d(f: list, inf: int) -> list:
    """Squared-distance transform of one sampled line.

    ``f[q]`` is the cost at sample ``q`` (0 at seeds, ``inf`` elsewhere).
    Returns ``d[q] = min_r (q - r)**2 + f[r]`` over finite ``f[r]``.
    """
    n = len(f)
    sites = [q for q in range(n) if f[q] < inf]
    if not sites:
        return [inf] * n
    v = [0] * len(sites)
    # boundaries between parabola k-1 and k, stored as exact fractions (num, den)
    z_num = [0] * (len(sites) + 1)
    z_den = [1] * (len(sites) + 1)
    k = 0
    v[0] = sites[0]
    for q in sites[1:]:
        fq = f[q] + q * q
        while True:
            r = v[k]
            num = fq - (f[r] + r * r)
            den = 2 * (q - r)
            # intersection s = num/den <= z[k]  (dens are positive)
            if k > 0 and num * z_den[k] <= z_num[k] * den:
                k -= 1
                continue
            break
        k += 1
        v[k] = q
        z_num[k] = num
        z_den[k] = den
    last = k
    d = [0] * n
    k = 0
    for q in range(n):
        # advance while q lies beyond the boundary to the next parabola
        while k < last and z_num[k + 1] < q * z_den[k + 1]:
            k += 1
        r = v[k]
        d[q] = (q - r) * (q - r) + f[r]
    return d


def squared_edt(seeds: np.ndarray) -> np.ndarray:
    """Integer squared Euclidean distance from every pixel to the nearest seed.

    ``seeds`` is a boolean 2-D array with at least one True entry.
    """
    seeds = np.asarray(seeds, dtype=bool)
    if not seeds.any():
        raise EmptyForegroundError("distance transform needs at least one seed pixel")
    h, w = seeds.shape
    inf = 4 * (h * h + w * w) + 1
    cols = np.where(seeds, 0, inf).astype(np.int64)
    stage = np.empty((h, w), dtype=np.int64)
    for c in range(w):
        stage[:, c] = _envelope_1d(cols[:, c].tolist(), inf)
    out = np.empty((h, w), dtype=np.int64)
    for r in range(h):
        out[r] = _envelope_1d(stage[r].tolist(), inf)
    return out


def edt(mask: BinaryMask) -> np.ndarray:
    """Distance from each pixel center to the nearest foreground pixel center."""
    return np.sqrt(squared_edt(mask.foreground).astype(np.float64))


def _require_two_classes(mask: BinaryMask) -> None:
    n_fg = mask.count()
    if n_fg == 0 or n_fg == mask.height * mask.width:
        kind = "background" if n_fg else "foreground"
        raise SingleClassMaskError(
            f"single-class mask (all {kind}): distance to the absent class is undefined"
        )


def signed_squared_distance(mask: BinaryMask) -> np.ndarray:
    """Squared distance to the opposite class, negated on foreground (int64)."""
    _require_two_classes(mask)
    fg = mask.foreground
    to_fg = squared_edt(fg)
    to_bg = squared_edt(~fg)
    return np.where(fg, -to_bg, to_fg)


def _signed_root(sq: np.ndarray) -> np.ndarray:
    return np.sign(sq) * np.sqrt(np.abs(sq).astype(np.float64))


def signed_distance(mask: BinaryMask) -> SdfMap:
    """Signed distance map: inside is minus the distance to the nearest
    background pixel, outside is the distance to the nearest foreground
    pixel.  No pixel is exactly zero."""
    return SdfMap(_signed_root(signed_squared_distance(mask)))


def brute_force_signed_squared_distance(mask: BinaryMask) -> np.ndarray:
    """All-pairs oracle for :func:`signed_squared_distance`; O(N^2) memory and time."""
    _require_two_classes(mask)
    fg = mask.foreground
    rr, cc = np.indices(mask.shape)
    pts = np.stack([rr.ravel(), cc.ravel()], axis=1).astype(np.int64)
    flat_fg = fg.ravel()
    out = np.empty(pts.shape[0], dtype=np.int64)
    for label, sign in ((True, -1), (False, 1)):
        src = pts[flat_fg == label]
        dst = pts[flat_fg != label]
        diff = src[:, None, :] - dst[None, :, :]
        d2 = (diff * diff).sum(axis=2).min(axis=1)
        out[flat_fg == label] = sign * d2
    return out.reshape(mask.shape)


def brute_force_signed_distance(mask: BinaryMask) -> SdfMap:
    return SdfMap(_signed_root(brute_force_signed_squared_distance(mask)))


def normalize_sdf(sdf: SdfMap) -> SdfMap:
    """Z-score the map with its own mean and population std."""
    if sdf.normalized:
        raise NormalizationError("map is already normalized")
    mean = float(sdf.data.mean())
    std = float(sdf.data.std())
    if not std > 0:
        raise DegenerateMapError("cannot normalize a constant map (std = 0)")
    return SdfMap((sdf.data - mean) / std, True, (mean, std))


def denormalize_sdf(sdf: SdfMap) -> SdfMap:
    if not sdf.normalized:
        raise NormalizationError("map is not normalized")
    mean, std = sdf.norm_params
    return SdfMap(sdf.data * std + mean)


def to_pixel_units(sdf: SdfMap) -> SdfMap:
    """Return the map in pixel units, undoing normalization if present."""
    return denormalize_sdf(sdf) if sdf.normalized else sdf
