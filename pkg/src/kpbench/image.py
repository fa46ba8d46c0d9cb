"""8-bit RGB raster helpers shared by the corruption and augmentation code.

Images are numpy arrays of shape (height, width, 3), dtype uint8, row-major.
All pixel math happens in float64 and is finished with ``finalize_u8``:
clip to [0, 255] first, then round half away from zero.
"""

from __future__ import annotations

import io
from pathlib import Path

import numpy as np
from PIL import Image


def ensure_rgb(img: np.ndarray) -> np.ndarray:
    """Validate an (H, W, 3) uint8 image and return it unchanged."""
    arr = np.asarray(img)
    if arr.ndim != 3 or arr.shape[2] != 3:
        raise ValueError(f"expected an (H, W, 3) RGB array, got shape {arr.shape}")
    if arr.dtype != np.uint8:
        raise ValueError(f"expected uint8 samples, got dtype {arr.dtype}")
    if arr.shape[0] < 1 or arr.shape[1] < 1:
        raise ValueError(f"image dimensions must be >= 1, got {arr.shape[:2]}")
    return arr


def round_half_away(x: np.ndarray) -> np.ndarray:
    """Round to nearest integer, ties away from zero (element-wise)."""
    return np.sign(x) * np.floor(np.abs(x) + 0.5)


def finalize_u8(x: np.ndarray) -> np.ndarray:
    """Clip to [0, 255], then round half away from zero, as uint8."""
    clipped = np.clip(x, 0.0, 255.0)
    return np.floor(clipped + 0.5).astype(np.uint8)


def rgb_to_hsv(img: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Hexagonal HSV with H in degrees [0, 360), S and V in [0, 1]."""
    rgb = np.asarray(img, dtype=np.float64) / 255.0
    r, g, b = rgb[..., 0], rgb[..., 1], rgb[..., 2]
    v = rgb.max(axis=-1)
    lo = rgb.min(axis=-1)
    delta = v - lo

    with np.errstate(invalid="ignore", divide="ignore"):
        s = np.where(v > 0, delta / np.where(v > 0, v, 1.0), 0.0)
        dl = np.where(delta > 0, delta, 1.0)
        h = np.select(
            [delta == 0, v == r, v == g],
            [0.0, ((g - b) / dl) % 6.0, (b - r) / dl + 2.0],
            default=(r - g) / dl + 4.0,
        )
    return h * 60.0, s, v


def hsv_to_rgb(h: np.ndarray, s: np.ndarray, v: np.ndarray) -> np.ndarray:
    """Inverse of :func:`rgb_to_hsv`; returns float64 RGB in [0, 255]."""
    hp = (np.asarray(h, dtype=np.float64) / 60.0) % 6.0
    i = np.floor(hp).astype(np.int64) % 6
    f = hp - np.floor(hp)
    p = v * (1.0 - s)
    q = v * (1.0 - s * f)
    t = v * (1.0 - s * (1.0 - f))

    r = np.choose(i, [v, q, p, p, t, v])
    g = np.choose(i, [t, v, v, q, p, p])
    b = np.choose(i, [p, p, t, v, v, q])
    return np.stack([r, g, b], axis=-1) * 255.0


def load_image(path: str | Path) -> np.ndarray:
    """Decode a PNG/JPEG file to an (H, W, 3) uint8 array."""
    with Image.open(path) as im:
        return np.asarray(im.convert("RGB"), dtype=np.uint8)


def save_png(img: np.ndarray, path: str | Path) -> None:
    """Encode an RGB array losslessly as PNG (regardless of path suffix)."""
    ensure_rgb(img)
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    Image.fromarray(img, mode="RGB").save(path, format="PNG")


def png_bytes(img: np.ndarray) -> bytes:
    ensure_rgb(img)
    buf = io.BytesIO()
    Image.fromarray(img, mode="RGB").save(buf, format="PNG")
    return buf.getvalue()
