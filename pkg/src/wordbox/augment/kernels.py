"""Image degradation kernels.

Each kernel takes a gray ``uint8`` array and returns a new one. Kernels that
need randomness take a ``numpy.random.Generator``; geometric kernels sample
bilinearly and fill regions uncovered by the source with the border-median
background, since a camera never produces black borders.
"""
from __future__ import annotations

import math

import numpy as np
from scipy import ndimage

from ..imagecore import as_gray, estimate_background, resize_bilinear, to_uint8


def _sample(img: np.ndarray, src_x: np.ndarray, src_y: np.ndarray, fill: int) -> np.ndarray:
    """Bilinear lookup at float source coordinates.

    Points within half a pixel of the image edge are clamped onto it; points
    farther out take ``fill``.
    """
    h, w = img.shape
    outside = (src_x < -0.5) | (src_x > w - 0.5) | (src_y < -0.5) | (src_y > h - 0.5)
    x = np.clip(src_x, 0, w - 1)
    y = np.clip(src_y, 0, h - 1)
    x0 = np.floor(x).astype(np.intp)
    y0 = np.floor(y).astype(np.intp)
    x1 = np.minimum(x0 + 1, w - 1)
    y1 = np.minimum(y0 + 1, h - 1)
    fx, fy = x - x0, y - y0
    f = img.astype(np.float64)
    top = f[y0, x0] * (1 - fx) + f[y0, x1] * fx
    bot = f[y1, x0] * (1 - fx) + f[y1, x1] * fx
    out = top * (1 - fy) + bot * fy
    out[outside] = fill
    return to_uint8(out)


def _grid(img):
    h, w = img.shape
    return np.mgrid[0:h, 0:w].astype(np.float64)


def gaussian_blur(img, sigma: float) -> np.ndarray:
    img = as_gray(img)
    if sigma <= 0:
        raise ValueError("sigma must be positive")
    return to_uint8(ndimage.gaussian_filter(img.astype(np.float64), sigma, mode="nearest"))


def motion_kernel(length: float, angle: float) -> np.ndarray:
    """Normalized line kernel of the given length (pixels) and angle (degrees)."""
    size = int(math.ceil(length)) | 1
    k = np.zeros((size, size))
    c = size // 2
    theta = math.radians(angle)
    dx, dy = math.cos(theta), -math.sin(theta)
    n = max(2, int(math.ceil(length * 4)))
    for t in np.linspace(-(length - 1) / 2, (length - 1) / 2, n):
        x, y = c + t * dx, c + t * dy
        x0, y0 = int(math.floor(x)), int(math.floor(y))
        fx, fy = x - x0, y - y0
        for yy, xx, wgt in ((y0, x0, (1 - fx) * (1 - fy)), (y0, x0 + 1, fx * (1 - fy)),
                            (y0 + 1, x0, (1 - fx) * fy), (y0 + 1, x0 + 1, fx * fy)):
            if 0 <= yy < size and 0 <= xx < size:
                k[yy, xx] += wgt
    return k / k.sum()


def motion_blur(img, length: float, angle: float) -> np.ndarray:
    img = as_gray(img)
    if length <= 1:
        return img.copy()
    k = motion_kernel(length, angle)
    return to_uint8(ndimage.convolve(img.astype(np.float64), k, mode="nearest"))


def gaussian_noise(img, stddev: float, rng: np.random.Generator) -> np.ndarray:
    img = as_gray(img)
    if stddev == 0:
        return img.copy()
    return to_uint8(img + rng.normal(0.0, stddev, img.shape))


def salt_pepper(img, fraction: float, rng: np.random.Generator) -> np.ndarray:
    img = as_gray(img)
    out = img.copy()
    n = int(round(fraction * img.size))
    if n == 0:
        return out
    idx = rng.choice(img.size, size=n, replace=False)
    salt = rng.random(n) < 0.5
    flat = out.reshape(-1)
    flat[idx[salt]] = 255
    flat[idx[~salt]] = 0
    return out


def shadow_gradient(img, direction: float, min_gain: float) -> np.ndarray:
    """Multiply by a linear ramp from 1 down to ``min_gain`` along ``direction`` (degrees)."""
    img = as_gray(img)
    if not 0 < min_gain <= 1:
        raise ValueError("min_gain must lie in (0, 1]")
    yy, xx = _grid(img)
    theta = math.radians(direction)
    t = xx * math.cos(theta) + yy * math.sin(theta)
    span = t.max() - t.min()
    t = (t - t.min()) / span if span > 0 else np.zeros_like(t)
    gain = 1.0 - (1.0 - min_gain) * t
    return to_uint8(img * gain)


def rotate(img, degrees: float) -> np.ndarray:
    """Rotate about the image centre, keeping the original size."""
    img = as_gray(img)
    h, w = img.shape
    yy, xx = _grid(img)
    cy, cx = (h - 1) / 2, (w - 1) / 2
    theta = math.radians(degrees)
    c, s = math.cos(theta), math.sin(theta)
    dx, dy = xx - cx, yy - cy
    # inverse map: rotate output coordinates back by -theta
    src_x = c * dx + s * dy + cx
    src_y = -s * dx + c * dy + cy
    return _sample(img, src_x, src_y, estimate_background(img))


def homography(src_pts, dst_pts) -> np.ndarray:
    """3x3 matrix mapping each of four ``src_pts`` onto the matching ``dst_pts``."""
    a, b = [], []
    for (x, y), (u, v) in zip(src_pts, dst_pts):
        a.append([x, y, 1, 0, 0, 0, -u * x, -u * y])
        a.append([0, 0, 0, x, y, 1, -v * x, -v * y])
        b.extend([u, v])
    m = np.linalg.solve(np.array(a, dtype=np.float64), np.array(b, dtype=np.float64))
    return np.append(m, 1.0).reshape(3, 3)


def perspective(img, corner_displacements) -> np.ndarray:
    """Warp so the four corners (TL, TR, BR, BL) move by the given (dx, dy) pixels."""
    img = as_gray(img)
    h, w = img.shape
    d = np.asarray(corner_displacements, dtype=np.float64).reshape(4, 2)
    corners = np.array([[0, 0], [w - 1, 0], [w - 1, h - 1], [0, h - 1]], dtype=np.float64)
    if not d.any():
        return img.copy()
    # inverse map: output corners (moved) -> source corners
    hm = homography(corners + d, corners)
    yy, xx = _grid(img)
    den = hm[2, 0] * xx + hm[2, 1] * yy + hm[2, 2]
    src_x = (hm[0, 0] * xx + hm[0, 1] * yy + hm[0, 2]) / den
    src_y = (hm[1, 0] * xx + hm[1, 1] * yy + hm[1, 2]) / den
    return _sample(img, src_x, src_y, estimate_background(img))


def sheet_bend(img, amplitude: float, wavelength: float, phase: float = 0.0) -> np.ndarray:
    """Sinusoidal vertical displacement along x, like a gently curled page."""
    img = as_gray(img)
    if amplitude == 0:
        return img.copy()
    yy, xx = _grid(img)
    src_y = yy + amplitude * np.sin(2 * math.pi * xx / wavelength + phase)
    return _sample(img, xx, src_y, estimate_background(img))


def erode(img) -> np.ndarray:
    """3x3 minimum filter (window clipped at the border). Thickens dark ink."""
    return ndimage.grey_erosion(as_gray(img), size=(3, 3), mode="nearest")


def dilate(img) -> np.ndarray:
    """3x3 maximum filter (window clipped at the border). Thins dark ink."""
    return ndimage.grey_dilation(as_gray(img), size=(3, 3), mode="nearest")


def resolution_drop(img, factor: float) -> np.ndarray:
    """Downsample by ``factor`` and back up to the original size."""
    img = as_gray(img)
    if not 0 < factor <= 1:
        raise ValueError("factor must lie in (0, 1]")
    h, w = img.shape
    small = resize_bilinear(img, max(1, int(round(w * factor))), max(1, int(round(h * factor))))
    return resize_bilinear(small, w, h)


def crop_sides(img, top: int, bottom: int, left: int, right: int) -> np.ndarray:
    img = as_gray(img)
    h, w = img.shape
    if min(top, bottom, left, right) < 0 or top + bottom >= h or left + right >= w:
        raise ValueError(f"cannot crop ({top}, {bottom}, {left}, {right}) from {w}x{h}")
    return img[top:h - bottom, left:w - right].copy()


def crop_jitter(img, max_fraction: float, rng: np.random.Generator) -> np.ndarray:
    """Trim each side by a random whole number of pixels, at most ``max_fraction`` of that axis."""
    img = as_gray(img)
    h, w = img.shape
    # keep at least one row/column however large the fraction
    my = min(int(math.floor(max_fraction * h)), (h - 1) // 2)
    mx = min(int(math.floor(max_fraction * w)), (w - 1) // 2)
    t, b = (int(v) for v in rng.integers(0, my + 1, size=2))
    left, r = (int(v) for v in rng.integers(0, mx + 1, size=2))
    return crop_sides(img, t, b, left, r)


def brightness_contrast(img, gain: float, bias: float) -> np.ndarray:
    """``gain * img + bias``, clamped."""
    return to_uint8(as_gray(img) * float(gain) + float(bias))


def invert(img) -> np.ndarray:
    return 255 - as_gray(img)
