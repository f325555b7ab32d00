"""Grayscale raster helpers shared by every stage of the pipeline.

A gray image is a 2-D ``numpy.uint8`` array indexed ``[row, column]``.
Nothing here mutates its input; every function returns a fresh array.
"""
from __future__ import annotations

from pathlib import Path

import numpy as np
from PIL import Image

__all__ = [
    "as_gray",
    "round_half_away",
    "row_profile",
    "resize_bilinear",
    "resample_bilinear",
    "pad_vertical",
    "crop_vertical",
    "estimate_background",
    "load_gray",
    "save_gray",
]

LUMA_WEIGHTS = (0.299, 0.587, 0.114)


def as_gray(img) -> np.ndarray:
    """Validate ``img`` as a non-empty 2-D 8-bit raster and return it as one."""
    arr = np.asarray(img)
    if arr.ndim != 2:
        raise ValueError(f"expected a 2-D grayscale array, got shape {arr.shape}")
    if arr.shape[0] < 1 or arr.shape[1] < 1:
        raise ValueError(f"image must be at least 1x1, got {arr.shape[1]}x{arr.shape[0]}")
    if arr.dtype != np.uint8:
        if arr.size and (arr.min() < 0 or arr.max() > 255):
            raise ValueError("intensities must lie in [0, 255]")
        if np.issubdtype(arr.dtype, np.floating) and not np.all(arr == np.floor(arr)):
            raise ValueError("non-integral intensities; round before converting")
        arr = arr.astype(np.uint8)
    return arr


def round_half_away(x):
    """Round to nearest, ties away from zero (``np.round`` rounds ties to even)."""
    x = np.asarray(x, dtype=np.float64)
    return np.sign(x) * np.floor(np.abs(x) + 0.5)


def to_uint8(x) -> np.ndarray:
    return np.clip(round_half_away(x), 0, 255).astype(np.uint8)


def row_profile(img) -> np.ndarray:
    """Mean intensity of every row, as float64.

    Row sums are accumulated in int64, which is exact for any width the
    type can hold, and divided once.
    """
    img = as_gray(img)
    sums = img.sum(axis=1, dtype=np.int64)
    return sums / np.float64(img.shape[1])


def _axis_taps(n_in: int, n_out: int, scale: float, shift: float):
    # half-pixel centers: output index o samples source (o + 0.5 - shift) / scale - 0.5
    src = (np.arange(n_out, dtype=np.float64) + 0.5 - shift) / scale - 0.5
    src = np.clip(src, 0.0, n_in - 1)
    lo = np.floor(src).astype(np.intp)
    hi = np.minimum(lo + 1, n_in - 1)
    frac = src - lo
    return lo, hi, frac


def resample_bilinear(img, new_width: int, new_height: int, *, scale_x: float | None = None,
                      scale_y: float | None = None, shift_y: float = 0.0) -> np.ndarray:
    """Bilinear resampling with explicit scale factors and a vertical shift.

    ``scale_x``/``scale_y`` default to the ratio of output to input size, which
    makes this a plain resize. Source coordinates falling outside the image
    are clamped to the edge.
    """
    img = as_gray(img)
    if new_width < 1 or new_height < 1:
        raise ValueError(f"target size must be positive, got {new_width}x{new_height}")
    h, w = img.shape
    sx = new_width / w if scale_x is None else float(scale_x)
    sy = new_height / h if scale_y is None else float(scale_y)
    if sx <= 0 or sy <= 0:
        raise ValueError("scale factors must be positive")

    y0, y1, fy = _axis_taps(h, new_height, sy, shift_y)
    x0, x1, fx = _axis_taps(w, new_width, sx, 0.0)
    src = img.astype(np.float64)
    fy = fy[:, None]
    rows = src[y0] * (1.0 - fy) + src[y1] * fy
    out = rows[:, x0] * (1.0 - fx) + rows[:, x1] * fx
    return to_uint8(out)


def resize_bilinear(img, new_width: int, new_height: int) -> np.ndarray:
    """Resize to ``new_width`` x ``new_height`` with bilinear interpolation."""
    return resample_bilinear(img, new_width, new_height)


def pad_vertical(img, top: int, bottom: int, fill: int) -> np.ndarray:
    img = as_gray(img)
    if top < 0 or bottom < 0:
        raise ValueError("padding must be non-negative")
    if not 0 <= fill <= 255:
        raise ValueError(f"fill intensity {fill} outside [0, 255]")
    h, w = img.shape
    out = np.full((h + top + bottom, w), fill, dtype=np.uint8)
    out[top:top + h] = img
    return out


def crop_vertical(img, row0: int, row1: int) -> np.ndarray:
    """Rows ``row0`` through ``row1`` inclusive."""
    img = as_gray(img)
    h = img.shape[0]
    if not 0 <= row0 <= row1 < h:
        raise IndexError(f"crop rows {row0}..{row1} invalid for height {h}")
    return img[row0:row1 + 1].copy()


def border_pixels(img) -> np.ndarray:
    img = as_gray(img)
    h, w = img.shape
    if h <= 2 or w <= 2:
        # every pixel touches the border
        return img.ravel().copy()
    return np.concatenate([img[0], img[-1], img[1:-1, 0], img[1:-1, -1]])


def estimate_background(img) -> int:
    """Median of the border ring, corners counted once; lower middle on ties."""
    ring = np.sort(border_pixels(img))
    return int(ring[(ring.size - 1) // 2])


def _luma(rgb: np.ndarray) -> np.ndarray:
    r, g, b = (rgb[..., i].astype(np.float64) for i in range(3))
    wr, wg, wb = LUMA_WEIGHTS
    return to_uint8(wr * r + wg * g + wb * b)


def load_gray(path) -> np.ndarray:
    """Decode an image file to 8-bit gray; color goes through BT.601 luma."""
    with Image.open(path) as im:
        im.load()
        if im.mode == "L":
            return np.array(im, dtype=np.uint8)
        if im.mode in ("1",):
            return np.array(im.convert("L"), dtype=np.uint8)
        if im.mode in ("I;16", "I;16B", "I;16L", "I"):
            arr = np.array(im, dtype=np.int64)
            return np.clip(arr >> 8, 0, 255).astype(np.uint8)
        if im.mode == "LA":
            return np.array(im.getchannel("L"), dtype=np.uint8)
        return _luma(np.array(im.convert("RGB")))


def save_gray(img, path) -> None:
    img = as_gray(img)
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    Image.fromarray(img, mode="L").save(path, format="PNG")
