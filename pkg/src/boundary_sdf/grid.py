"""Grid types, mask/SDF file I/O and mask <-> SDF conversion.

Masks are read from 8-bit grayscale PGM or PNG and written as binary PGM
(P5).  Signed distance maps use a small little-endian container::

    b"SDF1" | u32 height | u32 width | u8 normalized
           | [f64 mean | f64 std]  (only when normalized)
           | height*width f32, row-major
"""

from __future__ import annotations

import os
import struct
from dataclasses import dataclass, field
from typing import Optional, Tuple

import numpy as np
from PIL import Image, UnidentifiedImageError

from boundary_sdf.errors import FormatError, NormalizationError

SDF_MAGIC = b"SDF1"
_HEADER = struct.Struct("<4sIIB")
_NORM = struct.Struct("<dd")
MASK_THRESHOLD = 127


def _frozen(arr: np.ndarray) -> np.ndarray:
    arr = np.array(arr, copy=True)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class BinaryMask:
    """2-D {0,1} label grid; 1 marks foreground (inside the region)."""

    data: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.data)
        if arr.ndim != 2:
            raise ValueError(f"mask must be 2-D, got shape {arr.shape}")
        if arr.shape[0] < 1 or arr.shape[1] < 1:
            raise ValueError("mask must be at least 1x1")
        if arr.dtype == bool:
            arr = arr.astype(np.uint8)
        elif not np.all((arr == 0) | (arr == 1)):
            raise ValueError("mask values must be exactly 0 or 1")
        object.__setattr__(self, "data", _frozen(arr.astype(np.uint8)))

    @property
    def height(self) -> int:
        return self.data.shape[0]

    @property
    def width(self) -> int:
        return self.data.shape[1]

    @property
    def shape(self) -> Tuple[int, int]:
        return self.data.shape

    @property
    def foreground(self) -> np.ndarray:
        """Boolean view of the foreground set."""
        return self.data.astype(bool)

    def count(self) -> int:
        return int(self.data.sum())

    def complement(self) -> "BinaryMask":
        return BinaryMask(1 - self.data)

    def __eq__(self, other):
        if not isinstance(other, BinaryMask):
            return NotImplemented
        return self.shape == other.shape and bool(np.array_equal(self.data, other.data))

    def __hash__(self):
        return hash((self.shape, self.data.tobytes()))


@dataclass(frozen=True, eq=False)
class SdfMap:
    """Real-valued signed distance grid, negative inside, positive outside.

    Values are in pixel units unless ``normalized`` is set, in which case
    ``norm_params`` holds the ``(mean, std)`` that produced them.
    """

    data: np.ndarray
    normalized: bool = False
    norm_params: Optional[Tuple[float, float]] = field(default=None)

    def __post_init__(self):
        arr = np.asarray(self.data, dtype=np.float64)
        if arr.ndim != 2 or arr.shape[0] < 1 or arr.shape[1] < 1:
            raise ValueError(f"SDF must be a non-empty 2-D grid, got shape {arr.shape}")
        if not np.all(np.isfinite(arr)):
            raise ValueError("SDF values must be finite")
        if self.normalized:
            if self.norm_params is None:
                raise NormalizationError("normalized map requires norm_params")
            mean, std = (float(v) for v in self.norm_params)
            if not (np.isfinite(mean) and np.isfinite(std) and std > 0):
                raise NormalizationError(f"invalid norm_params {self.norm_params!r}")
            object.__setattr__(self, "norm_params", (mean, std))
        elif self.norm_params is not None:
            raise NormalizationError("norm_params given for an unnormalized map")
        object.__setattr__(self, "data", _frozen(arr))

    @property
    def height(self) -> int:
        return self.data.shape[0]

    @property
    def width(self) -> int:
        return self.data.shape[1]

    @property
    def shape(self) -> Tuple[int, int]:
        return self.data.shape

    def replace_data(self, data: np.ndarray) -> "SdfMap":
        """Same normalization state, new values."""
        return SdfMap(data, self.normalized, self.norm_params)

    def __eq__(self, other):
        if not isinstance(other, SdfMap):
            return NotImplemented
        return (
            self.shape == other.shape
            and self.normalized == other.normalized
            and self.norm_params == other.norm_params
            and bool(np.array_equal(self.data, other.data))
        )

    __hash__ = None


def load_mask(path) -> BinaryMask:
    """Read an 8-bit grayscale PGM or PNG; intensities above 127 are foreground."""
    path = os.fspath(path)
    if not os.path.exists(path):
        raise FileNotFoundError(path)
    try:
        with Image.open(path) as img:
            if img.format not in ("PPM", "PNG"):
                raise FormatError(f"{path}: unsupported image format {img.format}")
            if img.mode != "L":
                raise FormatError(f"{path}: expected 8-bit grayscale, got mode {img.mode}")
            arr = np.asarray(img, dtype=np.uint8)
    except UnidentifiedImageError as exc:
        raise FormatError(f"{path}: not a PGM or PNG image") from exc
    except (OSError, SyntaxError, ValueError) as exc:
        if isinstance(exc, FormatError):
            raise
        raise FormatError(f"{path}: {exc}") from exc
    if arr.ndim != 2 or arr.size == 0:
        raise FormatError(f"{path}: zero-sized image")
    return BinaryMask((arr > MASK_THRESHOLD).astype(np.uint8))


def save_mask(mask: BinaryMask, path) -> None:
    """Write ``mask`` as binary PGM with foreground 255 and background 0."""
    header = f"P5\n{mask.width} {mask.height}\n255\n".encode("ascii")
    payload = (mask.data * 255).astype(np.uint8).tobytes()
    with open(path, "wb") as fh:
        fh.write(header + payload)


def encode_sdf(sdf: SdfMap) -> bytes:
    parts = [_HEADER.pack(SDF_MAGIC, sdf.height, sdf.width, 1 if sdf.normalized else 0)]
    if sdf.normalized:
        parts.append(_NORM.pack(*sdf.norm_params))
    parts.append(sdf.data.astype("<f4").tobytes())
    return b"".join(parts)


def decode_sdf(buf: bytes) -> SdfMap:
    if len(buf) < _HEADER.size:
        if buf[:4] != SDF_MAGIC[: len(buf[:4])]:
            raise FormatError("bad magic")
        raise FormatError("truncated header")
    magic, height, width, flag = _HEADER.unpack_from(buf, 0)
    if magic != SDF_MAGIC:
        raise FormatError(f"bad magic {magic!r}")
    if flag not in (0, 1):
        raise FormatError(f"invalid normalized flag {flag}")
    if height < 1 or width < 1:
        raise FormatError("zero-sized map")
    offset = _HEADER.size
    params = None
    if flag:
        if len(buf) < offset + _NORM.size:
            raise FormatError("truncated normalization parameters")
        params = _NORM.unpack_from(buf, offset)
        offset += _NORM.size
    expected = offset + 4 * height * width
    if len(buf) < expected:
        raise FormatError(f"truncated payload: {len(buf)} bytes, expected {expected}")
    if len(buf) > expected:
        raise FormatError(f"trailing bytes: {len(buf)} bytes, expected {expected}")
    values = np.frombuffer(buf, dtype="<f4", count=height * width, offset=offset)
    if not np.all(np.isfinite(values)):
        raise FormatError("non-finite value in payload")
    data = values.astype(np.float64).reshape(height, width)
    try:
        return SdfMap(data, bool(flag), params)
    except NormalizationError as exc:
        raise FormatError(str(exc)) from exc


def save_sdf(sdf: SdfMap, path) -> None:
    """Write ``sdf`` in the SDF1 container.

    The payload is float32, so values are rounded to single precision;
    maps read back by :func:`load_sdf` re-save byte-identically.
    """
    with open(path, "wb") as fh:
        fh.write(encode_sdf(sdf))


def load_sdf(path) -> SdfMap:
    with open(path, "rb") as fh:
        return decode_sdf(fh.read())


def mask_from_sdf(sdf: SdfMap, threshold: float = 0.0) -> BinaryMask:
    """Foreground wherever the map is strictly below ``threshold``."""
    return BinaryMask((sdf.data < threshold).astype(np.uint8))
