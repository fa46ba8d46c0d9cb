"""The ten corruption operators.

All operators are pure functions of their arguments: given the same pixels,
parameters, and seed they return byte-identical results. Every operator
preserves the input's dimensions and returns valid 8-bit samples.
"""

from __future__ import annotations

import io
import math

import numpy as np
from PIL import Image
from scipy import ndimage

from ..image import ensure_rgb, finalize_u8, hsv_to_rgb, rgb_to_hsv, round_half_away
from .seeding import rng_from_seed


def motion_blur(img: np.ndarray, radius: int, sigma: float, seed: int) -> np.ndarray:
    """Directional blur with a normalized line kernel of length 2*radius+1.

    Taps are Gaussian-weighted (std ``sigma``) along a line whose angle is
    drawn uniformly from [-45, +45] degrees using ``seed``; borders replicate.
    """
    img = ensure_rgb(img)
    if radius < 0:
        raise ValueError(f"radius must be >= 0, got {radius}")
    if sigma < 0:
        raise ValueError(f"sigma must be >= 0, got {sigma}")
    if radius == 0:
        return img.copy()

    angle = rng_from_seed(seed).uniform(-45.0, 45.0)
    kernel = _line_kernel(radius, sigma, angle)

    out = np.empty_like(img, dtype=np.float64)
    for ch in range(3):
        out[..., ch] = ndimage.correlate(
            img[..., ch].astype(np.float64), kernel, mode="nearest"
        )
    return finalize_u8(out)


def _line_kernel(radius: int, sigma: float, angle_deg: float) -> np.ndarray:
    """Rasterize the weighted line into a (2r+1)^2 kernel summing to 1."""
    size = 2 * radius + 1
    kernel = np.zeros((size, size), dtype=np.float64)
    t = np.arange(-radius, radius + 1, dtype=np.float64)
    if sigma > 0:
        weights = np.exp(-(t**2) / (2.0 * sigma * sigma))
    else:
        weights = (t == 0).astype(np.float64)

    theta = math.radians(angle_deg)
    xs = t * math.cos(theta) + radius
    ys = t * math.sin(theta) + radius
    # bilinear splat keeps the kernel smooth at all angles
    x0 = np.floor(xs).astype(np.int64)
    y0 = np.floor(ys).astype(np.int64)
    fx = xs - x0
    fy = ys - y0
    for dy, dx, w in (
        (0, 0, (1 - fx) * (1 - fy)),
        (0, 1, fx * (1 - fy)),
        (1, 0, (1 - fx) * fy),
        (1, 1, fx * fy),
    ):
        yy = np.clip(y0 + dy, 0, size - 1)
        xx = np.clip(x0 + dx, 0, size - 1)
        np.add.at(kernel, (yy, xx), weights * w)
    return kernel / kernel.sum()


def gaussian_noise(img: np.ndarray, sigma: float, gain: float = 1.0, *, seed: int) -> np.ndarray:
    """Additive zero-mean Gaussian noise with std ``gain * sigma`` in 8-bit
    intensity units, independent per channel per pixel."""
    img = ensure_rgb(img)
    if sigma < 0:
        raise ValueError(f"sigma must be >= 0, got {sigma}")
    if gain <= 0:
        raise ValueError(f"gain must be > 0, got {gain}")
    if sigma == 0:
        return img.copy()
    rng = rng_from_seed(seed)
    noise = rng.standard_normal(img.shape) * (gain * sigma)
    return finalize_u8(img.astype(np.float64) + noise)


def impulse_noise(img: np.ndarray, proportion: float, seed: int) -> np.ndarray:
    """Salt-and-pepper: ``proportion`` percent of pixel positions (chosen
    without replacement) are set whole-pixel to black or white, 50/50."""
    img = ensure_rgb(img)
    if not 0 <= proportion <= 100:
        raise ValueError(f"proportion must be in [0, 100], got {proportion}")
    h, w = img.shape[:2]
    count = _impulse_count(proportion, w, h)
    if count == 0:
        return img.copy()
    flat_positions, values = _impulse_positions(proportion, w, h, seed)
    out = img.copy()
    out.reshape(-1, 3)[flat_positions] = values[:, None]
    return out


def _impulse_count(proportion: float, width: int, height: int) -> int:
    return int(math.floor(proportion * width * height / 100.0))


def _impulse_positions(
    proportion: float, width: int, height: int, seed: int
) -> tuple[np.ndarray, np.ndarray]:
    """Seeded selection shared by the operator and its counting oracle."""
    count = _impulse_count(proportion, width, height)
    rng = rng_from_seed(seed)
    positions = rng.choice(width * height, size=count, replace=False)
    values = rng.integers(0, 2, size=count, dtype=np.int64).astype(np.uint8) * 255
    return positions, values


def pixelate(img: np.ndarray, ratio: float) -> np.ndarray:
    """Box-average downscale to ``ratio`` percent, then nearest-neighbor
    upscale back to the original size."""
    img = ensure_rgb(img)
    if not 0 < ratio <= 100:
        raise ValueError(f"ratio must be in (0, 100], got {ratio}")
    h, w = img.shape[:2]
    small_w = max(1, math.ceil(w * ratio / 100.0))
    small_h = max(1, math.ceil(h * ratio / 100.0))
    if small_w == w and small_h == h:
        return img.copy()

    small = _box_downscale(img.astype(np.float64), small_h, small_w)
    small_u8 = np.floor(np.clip(small, 0.0, 255.0) + 0.5).astype(np.uint8)

    # pixel-center nearest-neighbor mapping (integer arithmetic, no drift)
    rows = np.minimum(((np.arange(h, dtype=np.int64) * 2 + 1) * small_h) // (2 * h), small_h - 1)
    cols = np.minimum(((np.arange(w, dtype=np.int64) * 2 + 1) * small_w) // (2 * w), small_w - 1)
    return small_u8[rows][:, cols]


def _box_downscale(img: np.ndarray, out_h: int, out_w: int) -> np.ndarray:
    """Exact area-average resize (separable, fractional pixel coverage)."""
    tmp = _box_axis(img, out_h, axis=0)
    return _box_axis(tmp, out_w, axis=1)


def _box_axis(arr: np.ndarray, out_n: int, axis: int) -> np.ndarray:
    n = arr.shape[axis]
    moved = np.moveaxis(arr, axis, 0).astype(np.float64)
    # prefix[i] = integral of the piecewise-constant signal over [0, i)
    prefix = np.concatenate([np.zeros((1,) + moved.shape[1:]), np.cumsum(moved, axis=0)])

    edges = np.arange(out_n + 1, dtype=np.float64) * n / out_n
    idx = np.clip(np.floor(edges).astype(np.int64), 0, n)
    frac = edges - idx
    # integral over [0, e) for fractional e
    integrals = prefix[idx] + np.where(
        (frac > 0)[(...,) + (None,) * (moved.ndim - 1)],
        moved[np.minimum(idx, n - 1)] * frac[(...,) + (None,) * (moved.ndim - 1)],
        0.0,
    )
    widths = np.diff(edges)
    out = np.diff(integrals, axis=0) / widths[(...,) + (None,) * (moved.ndim - 1)]
    return np.moveaxis(out, 0, axis)


def jpeg_compress(img: np.ndarray, quality: int) -> np.ndarray:
    """Round-trip through a baseline JPEG encoder (4:2:0 subsampling,
    libjpeg quality scaling of the standard quantization tables)."""
    img = ensure_rgb(img)
    if not 1 <= quality <= 100:
        raise ValueError(f"quality must be in [1, 100], got {quality}")
    buf = io.BytesIO()
    Image.fromarray(img, mode="RGB").save(
        buf, format="JPEG", quality=int(quality), subsampling=2, optimize=False
    )
    buf.seek(0)
    with Image.open(buf) as decoded:
        out = np.asarray(decoded.convert("RGB"), dtype=np.uint8)
    return out


def color_quant(img: np.ndarray, bits: int) -> np.ndarray:
    """Posterize: keep the top ``bits`` bits of each channel."""
    img = ensure_rgb(img)
    if not 1 <= bits <= 8:
        raise ValueError(f"bits must be in [1, 8], got {bits}")
    mask = np.uint8(0xFF & ~((1 << (8 - bits)) - 1))
    return img & mask


def brightness(img: np.ndarray, delta_v: float) -> np.ndarray:
    """Add ``delta_v`` to the HSV value channel (clipped at 1), keeping hue
    and saturation fixed."""
    img = ensure_rgb(img)
    if not 0 <= delta_v <= 1:
        raise ValueError(f"delta_v must be in [0, 1], got {delta_v}")
    h, s, v = rgb_to_hsv(img)
    v = np.minimum(1.0, v + delta_v)
    return finalize_u8(hsv_to_rgb(h, s, v))


def darkness(img: np.ndarray, gamma: float) -> np.ndarray:
    """Linear intensity scaling ``out = gamma * in`` (the parameter is named
    gamma for table compatibility; this is not a power curve)."""
    img = ensure_rgb(img)
    if not 0 < gamma <= 1:
        raise ValueError(f"gamma must be in (0, 1], got {gamma}")
    return finalize_u8(img.astype(np.float64) * gamma)


def contrast(img: np.ndarray, c: float) -> np.ndarray:
    """Scale each channel's deviation from its whole-image mean by ``c``."""
    img = ensure_rgb(img)
    if c <= 0:
        raise ValueError(f"contrast factor must be > 0, got {c}")
    data = img.astype(np.float64)
    mu = data.mean(axis=(0, 1), keepdims=True)
    return finalize_u8((data - mu) * c + mu)


def keypoint_mask(
    img: np.ndarray,
    targets,
    size: int,
    fill: int = 0,
) -> np.ndarray:
    """Fill a ``size`` x ``size`` square (clipped to bounds) around every
    target with visibility > 0. Targets are (x, y, v) triplets; coordinates
    round half away from zero to pixel centers."""
    img = ensure_rgb(img)
    if size < 0:
        raise ValueError(f"size must be >= 0, got {size}")
    if not 0 <= fill <= 255:
        raise ValueError(f"fill must be an 8-bit value, got {fill}")
    out = img.copy()
    if size == 0:
        return out
    h, w = img.shape[:2]
    half = size // 2
    for x, y, v in targets:
        if v <= 0:
            continue
        px = int(round_half_away(np.float64(x)))
        py = int(round_half_away(np.float64(y)))
        x0 = max(0, px - half)
        y0 = max(0, py - half)
        x1 = min(w, px - half + size)
        y1 = min(h, py - half + size)
        if x0 < x1 and y0 < y1:
            out[y0:y1, x0:x1] = fill
    return out
