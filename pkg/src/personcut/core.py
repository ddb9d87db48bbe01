"""Shared raster, mask, and detection types plus box geometry and the mask run-length codec."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

import numpy as np

from .errors import DimensionMismatchError, MaskCodecError

__all__ = [
    "RasterImage",
    "BoundingBox",
    "BinaryMask",
    "RleCounts",
    "Detection",
    "bbox_area",
    "rle_decode",
    "rle_encode",
    "mask_union",
]


def _freeze(arr: np.ndarray) -> np.ndarray:
    # Zero-copy when already contiguous; freezing makes sharing across workers safe.
    out = np.ascontiguousarray(arr)
    out.setflags(write=False)
    return out


@dataclass(frozen=True, eq=False)
class RasterImage:
    """One 8-bit RGB frame: a (height, width, 3) uint8 array, immutable once built.

    The backing array is frozen in place (made read-only), not copied; pass a
    copy if the caller needs to keep a writable reference.
    """

    pixels: np.ndarray

    def __post_init__(self) -> None:
        px = self.pixels
        if not isinstance(px, np.ndarray) or px.dtype != np.uint8:
            raise ValueError("pixels must be a uint8 ndarray")
        if px.ndim != 3 or px.shape[2] != 3:
            raise ValueError(f"pixels must have shape (H, W, 3), got {px.shape!r}")
        if px.shape[0] < 1 or px.shape[1] < 1:
            raise ValueError("images must be at least 1x1")
        object.__setattr__(self, "pixels", _freeze(px))

    @classmethod
    def from_array(cls, arr) -> "RasterImage":
        """Build from any array-like of 8-bit channel values (cast to uint8)."""
        return cls(np.asarray(arr, dtype=np.uint8))

    @property
    def height(self) -> int:
        return self.pixels.shape[0]

    @property
    def width(self) -> int:
        return self.pixels.shape[1]

    def tobytes(self) -> bytes:
        """Row-major interleaved RGB bytes, 3 bytes per pixel."""
        return self.pixels.tobytes()

    def __eq__(self, other) -> bool:
        if not isinstance(other, RasterImage):
            return NotImplemented
        return self.pixels.shape == other.pixels.shape and bool(
            np.array_equal(self.pixels, other.pixels)
        )


@dataclass(frozen=True)
class BoundingBox:
    """Axis-aligned box stored as raw (y1, x1, y2, x2) pixel offsets."""

    y1: int
    x1: int
    y2: int
    x2: int

    def __post_init__(self) -> None:
        if min(self.y1, self.x1, self.y2, self.x2) < 0:
            raise ValueError(f"box coordinates must be non-negative: {self}")
        if self.y2 < self.y1 or self.x2 < self.x1:
            raise ValueError(f"box must have y2 >= y1 and x2 >= x1: {self}")

    @property
    def height(self) -> int:
        return self.y2 - self.y1

    @property
    def width(self) -> int:
        return self.x2 - self.x1


def bbox_area(bbox: BoundingBox) -> int:
    """Rectangle area in square pixels: height times width of the stored offsets."""
    return bbox.height * bbox.width


@dataclass(frozen=True, eq=False)
class BinaryMask:
    """Per-pixel membership for one object instance: a (height, width) bool array.

    Frozen in place on construction, like RasterImage.
    """

    bits: np.ndarray

    def __post_init__(self) -> None:
        b = self.bits
        if not isinstance(b, np.ndarray) or b.dtype != np.bool_:
            raise ValueError("bits must be a bool ndarray (use BinaryMask.from_array to coerce)")
        if b.ndim != 2:
            raise ValueError(f"bits must have shape (H, W), got {b.shape!r}")
        if b.shape[0] < 1 or b.shape[1] < 1:
            raise ValueError("masks must be at least 1x1")
        object.__setattr__(self, "bits", _freeze(b))

    @classmethod
    def from_array(cls, arr) -> "BinaryMask":
        """Build from any array-like; nonzero values become set bits."""
        return cls(np.asarray(arr).astype(bool))

    @property
    def height(self) -> int:
        return self.bits.shape[0]

    @property
    def width(self) -> int:
        return self.bits.shape[1]

    @property
    def shape(self) -> tuple[int, int]:
        """(height, width)."""
        return self.bits.shape

    def __eq__(self, other) -> bool:
        if not isinstance(other, BinaryMask):
            return NotImplemented
        return self.shape == other.shape and bool(np.array_equal(self.bits, other.bits))


@dataclass(frozen=True)
class RleCounts:
    """Column-major run-length counts for a binary mask.

    Runs alternate 0, 1, 0, ... over the mask traversed column by column; the
    first count is the number of leading zeros and may be 0. A decodable
    encoding has counts summing to height * width.
    """

    counts: tuple[int, ...]
    size: tuple[int, int]  # (height, width)

    def __post_init__(self) -> None:
        counts = tuple(int(c) for c in self.counts)
        if any(c < 0 for c in counts):
            raise ValueError("run counts must be non-negative")
        size = (int(self.size[0]), int(self.size[1]))
        if len(self.size) != 2 or size[0] < 1 or size[1] < 1:
            raise ValueError(f"size must be a positive (height, width) pair, got {self.size!r}")
        object.__setattr__(self, "counts", counts)
        object.__setattr__(self, "size", size)


def rle_decode(rle: RleCounts) -> BinaryMask:
    """Expand run-length counts back into a mask.

    Raises MaskCodecError when the counts do not sum to height * width.
    """
    h, w = rle.size
    counts = np.asarray(rle.counts, dtype=np.int64)
    total = int(counts.sum())
    if total != h * w:
        raise MaskCodecError(f"run counts sum to {total}, expected {h * w} for a {h}x{w} mask")
    values = (np.arange(counts.size) % 2).astype(bool)
    flat = np.repeat(values, counts)
    return BinaryMask(flat.reshape((h, w), order="F"))


def rle_encode(mask: BinaryMask) -> RleCounts:
    """Encode a mask as canonical column-major run-length counts.

    Canonical means no zero-length interior runs and a leading zero count only
    when the first pixel is set; rle_decode inverts this exactly.
    """
    flat = mask.bits.ravel(order="F")
    change = np.flatnonzero(flat[1:] != flat[:-1]) + 1
    bounds = np.concatenate(([0], change, [flat.size]))
    counts = np.diff(bounds).tolist()
    if flat[0]:
        counts.insert(0, 0)
    return RleCounts(tuple(counts), (mask.height, mask.width))


def mask_union(masks: Iterable[BinaryMask], *, size: tuple[int, int] | None = None) -> BinaryMask:
    """Per-pixel OR of masks sharing one shape.

    An empty iterable is allowed only with an explicit (height, width) size and
    yields an all-clear mask. Raises DimensionMismatchError naming the first
    offending mask index on a shape mismatch.
    """
    masks = list(masks)
    if not masks:
        if size is None:
            raise ValueError("union of no masks requires an explicit size")
        return BinaryMask(np.zeros((int(size[0]), int(size[1])), dtype=bool))
    base = masks[0].shape
    if size is not None and base != (int(size[0]), int(size[1])):
        raise DimensionMismatchError(f"mask 0 has shape {base}, expected {tuple(size)}")
    acc = masks[0].bits.copy()
    for i, m in enumerate(masks[1:], start=1):
        if m.shape != base:
            raise DimensionMismatchError(f"mask {i} has shape {m.shape}, expected {base}")
        np.logical_or(acc, m.bits, out=acc)
    return BinaryMask(acc)


@dataclass(frozen=True, eq=False)
class Detection:
    """One segmented instance: identity, class, confidence, box, and mask."""

    instance_id: int
    class_id: int
    class_name: str
    score: float
    bbox: BoundingBox
    mask: BinaryMask

    def __post_init__(self) -> None:
        if not 0.0 <= self.score <= 1.0:
            raise ValueError(f"score must lie in [0, 1], got {self.score}")
