"""Resizing sources onto the background canvas and mask-driven pixel replacement.

All operations are pure and deterministic: resampling is defined on pixel
centers, arithmetic runs in float64 with round-half-up, and hard compositing
is an exact per-pixel select. Mask resizing is always nearest-neighbor so
bits stay binary. The heavy lifting stays inside numpy ufuncs, which release
the interpreter lock, so frames can be processed on concurrent workers.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Literal, Sequence

import numpy as np

from .core import BinaryMask, RasterImage
from .errors import DimensionMismatchError

__all__ = [
    "ResizePolicy",
    "letterbox_placement",
    "resize_image",
    "resize_mask",
    "composite",
    "composite_layers",
]


@dataclass(frozen=True)
class ResizePolicy:
    """How sources (and the masks that track them) map onto the output canvas.

    Stretch maps the full source extent onto the full target extent; letterbox
    preserves aspect ratio, centers the content, and pads with pad_color.
    """

    mode: Literal["stretch", "letterbox"] = "stretch"
    pad_color: tuple[int, int, int] = (0, 0, 0)
    image_filter: Literal["bilinear", "nearest"] = "bilinear"

    def __post_init__(self) -> None:
        if self.mode not in ("stretch", "letterbox"):
            raise ValueError(f"unknown resize mode {self.mode!r}")
        if self.image_filter not in ("bilinear", "nearest"):
            raise ValueError(f"unknown image filter {self.image_filter!r}")
        color = tuple(int(c) for c in self.pad_color)
        if len(color) != 3 or any(not 0 <= c <= 255 for c in color):
            raise ValueError(f"pad_color must be three 0..255 values, got {self.pad_color!r}")
        object.__setattr__(self, "pad_color", color)


def _check_target(target_w: int, target_h: int) -> None:
    if target_w < 1 or target_h < 1:
        raise ValueError(f"target dimensions must be >= 1, got {target_w}x{target_h}")


def _nearest_indices(src: int, dst: int) -> np.ndarray:
    # Sample at pixel centers: dst pixel i reads from floor((i + 0.5) * src/dst).
    idx = ((np.arange(dst) + 0.5) * (src / dst)).astype(np.intp)
    return np.minimum(idx, src - 1)


def _stretch_nearest(px: np.ndarray, target_w: int, target_h: int) -> np.ndarray:
    rows = np.take(px, _nearest_indices(px.shape[0], target_h), axis=0)
    return np.take(rows, _nearest_indices(px.shape[1], target_w), axis=1)


def _stretch_bilinear(px: np.ndarray, target_w: int, target_h: int) -> np.ndarray:
    src_h, src_w = px.shape[:2]
    ys = (np.arange(target_h) + 0.5) * (src_h / target_h) - 0.5
    xs = (np.arange(target_w) + 0.5) * (src_w / target_w) - 0.5
    y0f = np.floor(ys)
    x0f = np.floor(xs)
    wy = (ys - y0f)[:, None, None]
    wx = (xs - x0f)[None, :, None]
    y0 = np.clip(y0f, 0, src_h - 1).astype(np.intp)
    y1 = np.clip(y0f + 1, 0, src_h - 1).astype(np.intp)
    x0 = np.clip(x0f, 0, src_w - 1).astype(np.intp)
    x1 = np.clip(x0f + 1, 0, src_w - 1).astype(np.intp)

    rows0 = np.take(px, y0, axis=0).astype(np.float64)
    rows1 = np.take(px, y1, axis=0).astype(np.float64)
    a = np.take(rows0, x0, axis=1)
    b = np.take(rows0, x1, axis=1)
    c = np.take(rows1, x0, axis=1)
    d = np.take(rows1, x1, axis=1)
    top = a + (b - a) * wx
    bottom = c + (d - c) * wx
    out = top + (bottom - top) * wy
    return np.floor(out + 0.5).astype(np.uint8)


def _stretch(px: np.ndarray, target_w: int, target_h: int, image_filter: str) -> np.ndarray:
    if image_filter == "nearest":
        return _stretch_nearest(px, target_w, target_h)
    return _stretch_bilinear(px, target_w, target_h)


def letterbox_placement(
    src_w: int, src_h: int, dst_w: int, dst_h: int
) -> tuple[int, int, int, int]:
    """Content size and top-left offset for aspect-preserving placement.

    Returns (content_w, content_h, offset_x, offset_y).
    """
    scale = min(dst_w / src_w, dst_h / src_h)
    content_w = max(1, min(dst_w, round(src_w * scale)))
    content_h = max(1, min(dst_h, round(src_h * scale)))
    return content_w, content_h, (dst_w - content_w) // 2, (dst_h - content_h) // 2


def resize_image(
    img: RasterImage, target_w: int, target_h: int, policy: ResizePolicy
) -> RasterImage:
    """Resize onto a target_w x target_h canvas according to the policy.

    Resizing to the image's own dimensions returns the image unchanged.
    """
    _check_target(target_w, target_h)
    if (target_w, target_h) == (img.width, img.height):
        return img
    if policy.mode == "stretch":
        return RasterImage(_stretch(img.pixels, target_w, target_h, policy.image_filter))
    cw, ch, ox, oy = letterbox_placement(img.width, img.height, target_w, target_h)
    canvas = np.empty((target_h, target_w, 3), dtype=np.uint8)
    canvas[:] = np.asarray(policy.pad_color, dtype=np.uint8)
    canvas[oy : oy + ch, ox : ox + cw] = _stretch(img.pixels, cw, ch, policy.image_filter)
    return RasterImage(canvas)


def resize_mask(
    mask: BinaryMask,
    target_w: int,
    target_h: int,
    policy: ResizePolicy | None = None,
) -> BinaryMask:
    """Nearest-neighbor mask resize; bits stay binary.

    With a letterbox policy the mask follows the same placement as its image
    (content scaled, padding clear), so it keeps tracking the resized source.
    """
    _check_target(target_w, target_h)
    if (target_w, target_h) == (mask.width, mask.height):
        return mask
    if policy is None or policy.mode == "stretch":
        return BinaryMask(_stretch_nearest(mask.bits, target_w, target_h))
    cw, ch, ox, oy = letterbox_placement(mask.width, mask.height, target_w, target_h)
    canvas = np.zeros((target_h, target_w), dtype=bool)
    canvas[oy : oy + ch, ox : ox + cw] = _stretch_nearest(mask.bits, cw, ch)
    return BinaryMask(canvas)


def _check_same_dims(background: RasterImage, source: RasterImage, mask: BinaryMask) -> None:
    bg = (background.height, background.width)
    src = (source.height, source.width)
    msk = mask.shape
    if not (bg == src == msk):
        raise DimensionMismatchError(
            f"dimensions differ: background {bg[1]}x{bg[0]}, "
            f"source {src[1]}x{src[0]}, mask {msk[1]}x{msk[0]}"
        )


def _box_mean(a: np.ndarray, radius: int) -> np.ndarray:
    """Mean over a (2r+1)^2 window, renormalized at borders to in-bounds pixels."""
    h, w = a.shape
    ii = np.zeros((h + 1, w + 1), dtype=np.float64)
    ii[1:, 1:] = a.cumsum(axis=0).cumsum(axis=1)
    y0 = np.clip(np.arange(h) - radius, 0, h)
    y1 = np.clip(np.arange(h) + radius + 1, 0, h)
    x0 = np.clip(np.arange(w) - radius, 0, w)
    x1 = np.clip(np.arange(w) + radius + 1, 0, w)
    total = (
        ii[np.ix_(y1, x1)] - ii[np.ix_(y0, x1)] - ii[np.ix_(y1, x0)] + ii[np.ix_(y0, x0)]
    )
    counts = (y1 - y0)[:, None] * (x1 - x0)[None, :]
    return total / counts


def _apply_layer(
    out: np.ndarray, source: np.ndarray, mask: np.ndarray, feather: int
) -> np.ndarray:
    if feather <= 0:
        np.copyto(out, source, where=mask[:, :, None])
        return out
    weight = _box_mean(mask.astype(np.float64), feather)[:, :, None]
    blended = out.astype(np.float64)
    blended += weight * (source.astype(np.float64) - blended)
    return np.floor(blended + 0.5).astype(np.uint8)


def composite(
    background: RasterImage,
    source: RasterImage,
    selected_mask: BinaryMask,
    *,
    feather: int = 0,
) -> RasterImage:
    """Replace background pixels with source pixels wherever the mask is set.

    With feather == 0 (the default) replacement is hard and bit-exact; a
    positive feather radius box-blurs the mask into per-pixel blend weights
    for softer edges. Inputs are never mutated.
    """
    _check_same_dims(background, source, selected_mask)
    out = background.pixels.copy()
    out = _apply_layer(out, source.pixels, selected_mask.bits, feather)
    return RasterImage(out)


def composite_layers(
    background: RasterImage,
    layers: Sequence[tuple[RasterImage, BinaryMask]],
    *,
    feather: int = 0,
) -> RasterImage:
    """Apply (source, mask) layers in order; later layers overwrite earlier ones.

    An empty layer list returns the background unchanged.
    """
    if not layers:
        return background
    out = background.pixels.copy()
    for i, (source, mask) in enumerate(layers):
        try:
            _check_same_dims(background, source, mask)
        except DimensionMismatchError as exc:
            raise DimensionMismatchError(f"layer {i}: {exc}") from None
        out = _apply_layer(out, source.pixels, mask.bits, feather)
    return RasterImage(out)
