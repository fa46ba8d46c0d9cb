"""Training-time augmentation sets A-D as seedable, composable pipelines.

Set A covers blur and noise, B compression and color alteration, C lighting
adjustments, D occlusion and dropout. Every transform preserves geometry
(no crops, flips, or warps), so keypoint annotations transfer unchanged to
the augmented copies. Parameter ranges are package defaults collected in
``PARAM_RANGES`` (the benchmark corruption table fixes test-time strength;
training-time ranges are chosen to straddle its lower severities) and can
be overridden per pipeline.

Each transform fires independently with its configured probability using a
sub-stream derived from (seed, position, transform id), so a pipeline
application is a pure function of (pipeline, image, seed).
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Callable, Optional, Sequence

import numpy as np
from scipy import ndimage

from .corruption import ops
from .corruption.seeding import derive_seed, derive_stream_seed, rng_from_seed
from .data import DatasetIndex
from .image import ensure_rgb, finalize_u8, hsv_to_rgb, load_image, rgb_to_hsv, save_png

#: default sampling ranges for every transform parameter, overridable
PARAM_RANGES: dict[str, dict[str, tuple[float, float]]] = {
    "box_blur": {"size": (3, 5)},
    "median_blur": {"size": (3, 5)},
    "gaussian_blur": {"sigma": (0.5, 2.0)},
    "gaussian_noise": {"sigma": (1.0, 4.0)},
    "iso_noise": {"luma_sigma": (2.0, 6.0), "chroma_sigma": (1.0, 4.0)},
    "motion_blur": {"radius": (5, 15), "sigma": (2.0, 8.0)},
    "color_jitter": {"gain": (0.8, 1.2), "shift": (-20.0, 20.0)},
    "jpeg_reencode": {"quality": (18, 60)},
    "rgb_shift": {"shift": (-25.0, 25.0)},
    "to_gray": {},
    "pixel_dropout": {"fraction": (0.01, 0.05)},
    "hsv_jitter": {"hue_shift": (-10.0, 10.0), "sat_gain": (0.7, 1.3), "val_gain": (0.9, 1.1)},
    "brightness_jitter": {"delta_v": (-0.1, 0.3)},
    "contrast_jitter": {"factor": (0.3, 1.4)},
    "gamma_jitter": {"gamma": (0.5, 1.5)},
    "shadow_polygon": {"strength": (0.3, 0.7)},
    "xy_masking": {"bands": (1, 2), "thickness": (0.02, 0.08)},
    "grid_dropout": {"cell": (16, 48), "ratio": (0.2, 0.5)},
    "coarse_dropout": {"count": (2, 8), "extent": (0.04, 0.15)},
}

#: set id -> member transform ids, in pipeline order
SET_MEMBERS: dict[str, tuple[str, ...]] = {
    "A": ("box_blur", "median_blur", "gaussian_blur", "gaussian_noise", "iso_noise", "motion_blur"),
    "B": ("color_jitter", "jpeg_reencode", "rgb_shift", "to_gray", "pixel_dropout"),
    "C": ("hsv_jitter", "brightness_jitter", "contrast_jitter", "gamma_jitter", "shadow_polygon"),
    "D": ("xy_masking", "grid_dropout", "coarse_dropout"),
}

DEFAULT_PROBABILITY = 0.5


@dataclass(frozen=True)
class PipelineStep:
    transform_id: str
    probability: float = DEFAULT_PROBABILITY
    ranges: Optional[dict[str, tuple[float, float]]] = None

    def resolved_ranges(self) -> dict[str, tuple[float, float]]:
        base = dict(PARAM_RANGES[self.transform_id])
        if self.ranges:
            base.update(self.ranges)
        return base


@dataclass(frozen=True)
class AugmentationPipeline:
    steps: tuple[PipelineStep, ...]

    def __len__(self) -> int:
        return len(self.steps)

    def with_probability(self, probability: float) -> "AugmentationPipeline":
        return AugmentationPipeline(
            tuple(replace(s, probability=probability) for s in self.steps)
        )


def build_pipeline(
    sets: Sequence[str],
    probability: float = DEFAULT_PROBABILITY,
    ranges: Optional[dict[str, dict[str, tuple[float, float]]]] = None,
) -> AugmentationPipeline:
    """Concatenate the member transforms of the requested sets (A-D)."""
    if not sets:
        raise ValueError("at least one augmentation set id is required")
    normalized = [str(s).strip().upper() for s in sets]
    seen = set()
    for set_id in normalized:
        if set_id not in SET_MEMBERS:
            raise ValueError(
                f"unknown augmentation set {set_id!r}; valid ids: {sorted(SET_MEMBERS)}"
            )
        if set_id in seen:
            raise ValueError(f"duplicate augmentation set {set_id!r}")
        seen.add(set_id)
    if not 0 <= probability <= 1:
        raise ValueError(f"probability must be in [0, 1], got {probability}")

    steps = []
    for set_id in sorted(seen, key="ABCD".index):
        for tid in SET_MEMBERS[set_id]:
            steps.append(
                PipelineStep(tid, probability, (ranges or {}).get(tid))
            )
    return AugmentationPipeline(tuple(steps))


def apply_pipeline(pipeline: AugmentationPipeline, img: np.ndarray, seed: int) -> np.ndarray:
    out, _ = apply_pipeline_traced(pipeline, img, seed)
    return out


def apply_pipeline_traced(
    pipeline: AugmentationPipeline, img: np.ndarray, seed: int
) -> tuple[np.ndarray, list[str]]:
    """Apply the pipeline and report which transforms fired."""
    out = ensure_rgb(img).copy()
    fired: list[str] = []
    for position, step in enumerate(pipeline.steps):
        rng = rng_from_seed(derive_stream_seed(seed, position, step.transform_id))
        if rng.uniform() >= step.probability:
            continue
        out = _TRANSFORMS[step.transform_id](out, rng, step.resolved_ranges())
        fired.append(step.transform_id)
    return out, fired


def _uniform(rng, lo_hi) -> float:
    return float(rng.uniform(lo_hi[0], lo_hi[1]))


def _uniform_int(rng, lo_hi) -> int:
    return int(rng.integers(int(lo_hi[0]), int(lo_hi[1]) + 1))


def _odd_size(rng, lo_hi) -> int:
    size = _uniform_int(rng, lo_hi)
    return size if size % 2 else size + 1


def _t_box_blur(img, rng, ranges):
    size = _odd_size(rng, ranges["size"])
    out = np.empty_like(img, dtype=np.float64)
    for ch in range(3):
        out[..., ch] = ndimage.uniform_filter(
            img[..., ch].astype(np.float64), size=size, mode="nearest"
        )
    return finalize_u8(out)


def _t_median_blur(img, rng, ranges):
    size = _odd_size(rng, ranges["size"])
    out = np.empty_like(img)
    for ch in range(3):
        out[..., ch] = ndimage.median_filter(img[..., ch], size=size, mode="nearest")
    return out


def _t_gaussian_blur(img, rng, ranges):
    sigma = _uniform(rng, ranges["sigma"])
    out = np.empty_like(img, dtype=np.float64)
    for ch in range(3):
        out[..., ch] = ndimage.gaussian_filter(
            img[..., ch].astype(np.float64), sigma=sigma, mode="nearest"
        )
    return finalize_u8(out)


def _t_gaussian_noise(img, rng, ranges):
    sigma = _uniform(rng, ranges["sigma"])
    noise = rng.standard_normal(img.shape) * sigma
    return finalize_u8(img.astype(np.float64) + noise)


def _t_iso_noise(img, rng, ranges):
    luma = rng.standard_normal(img.shape[:2]) * _uniform(rng, ranges["luma_sigma"])
    chroma = rng.standard_normal(img.shape) * _uniform(rng, ranges["chroma_sigma"])
    return finalize_u8(img.astype(np.float64) + luma[..., None] + chroma)


def _t_motion_blur(img, rng, ranges):
    radius = _uniform_int(rng, ranges["radius"])
    sigma = _uniform(rng, ranges["sigma"])
    kernel_seed = int(rng.integers(0, 2**63 - 1))
    return ops.motion_blur(img, radius, sigma, kernel_seed)


def _t_color_jitter(img, rng, ranges):
    gains = np.array([_uniform(rng, ranges["gain"]) for _ in range(3)])
    shifts = np.array([_uniform(rng, ranges["shift"]) for _ in range(3)])
    return finalize_u8(img.astype(np.float64) * gains + shifts)


def _t_jpeg_reencode(img, rng, ranges):
    quality = _uniform_int(rng, ranges["quality"])
    return ops.jpeg_compress(img, quality)


def _t_rgb_shift(img, rng, ranges):
    shifts = np.array([_uniform(rng, ranges["shift"]) for _ in range(3)])
    return finalize_u8(img.astype(np.float64) + shifts)


def _t_to_gray(img, rng, ranges):
    luma = img[..., 0] * 0.299 + img[..., 1] * 0.587 + img[..., 2] * 0.114
    gray = finalize_u8(luma)
    return np.repeat(gray[..., None], 3, axis=2)


def _t_pixel_dropout(img, rng, ranges):
    fraction = _uniform(rng, ranges["fraction"])
    h, w = img.shape[:2]
    count = int(fraction * h * w)
    if count == 0:
        return img
    positions = rng.choice(h * w, size=count, replace=False)
    out = img.copy()
    out.reshape(-1, 3)[positions] = 0
    return out


def _t_hsv_jitter(img, rng, ranges):
    hue_shift = _uniform(rng, ranges["hue_shift"])
    sat_gain = _uniform(rng, ranges["sat_gain"])
    val_gain = _uniform(rng, ranges["val_gain"])
    h, s, v = rgb_to_hsv(img)
    h = (h + hue_shift) % 360.0
    s = np.clip(s * sat_gain, 0.0, 1.0)
    v = np.clip(v * val_gain, 0.0, 1.0)
    return finalize_u8(hsv_to_rgb(h, s, v))


def _t_brightness_jitter(img, rng, ranges):
    delta = _uniform(rng, ranges["delta_v"])
    h, s, v = rgb_to_hsv(img)
    v = np.clip(v + delta, 0.0, 1.0)
    return finalize_u8(hsv_to_rgb(h, s, v))


def _t_contrast_jitter(img, rng, ranges):
    return ops.contrast(img, _uniform(rng, ranges["factor"]))


def _t_gamma_jitter(img, rng, ranges):
    gamma = _uniform(rng, ranges["gamma"])
    return finalize_u8(255.0 * (img.astype(np.float64) / 255.0) ** gamma)


def _t_shadow_polygon(img, rng, ranges):
    strength = _uniform(rng, ranges["strength"])
    h, w = img.shape[:2]
    top = sorted(rng.uniform(0, w, size=2))
    bottom = sorted(rng.uniform(0, w, size=2))
    cols = np.arange(w, dtype=np.float64)[None, :]
    rows = np.arange(h, dtype=np.float64)[:, None]
    frac = rows / max(h - 1, 1)
    left = top[0] + (bottom[0] - top[0]) * frac
    right = top[1] + (bottom[1] - top[1]) * frac
    inside = (cols >= left) & (cols <= right)
    out = img.astype(np.float64)
    out[inside] *= 1.0 - strength
    return finalize_u8(out)


def _t_xy_masking(img, rng, ranges):
    out = img.copy()
    h, w = img.shape[:2]
    bands = _uniform_int(rng, ranges["bands"])
    for _ in range(bands):
        thickness = max(1, int(_uniform(rng, ranges["thickness"]) * h))
        y0 = int(rng.integers(0, max(h - thickness, 0) + 1))
        out[y0 : y0 + thickness, :] = 0
    for _ in range(bands):
        thickness = max(1, int(_uniform(rng, ranges["thickness"]) * w))
        x0 = int(rng.integers(0, max(w - thickness, 0) + 1))
        out[:, x0 : x0 + thickness] = 0
    return out


def _t_grid_dropout(img, rng, ranges):
    out = img.copy()
    h, w = img.shape[:2]
    cell = max(2, _uniform_int(rng, ranges["cell"]))
    ratio = _uniform(rng, ranges["ratio"])
    hole = max(1, int(cell * ratio))
    off_y = int(rng.integers(0, cell))
    off_x = int(rng.integers(0, cell))
    for y0 in range(off_y - cell, h, cell):
        for x0 in range(off_x - cell, w, cell):
            ys, ye = max(0, y0), min(h, y0 + hole)
            xs, xe = max(0, x0), min(w, x0 + hole)
            if ys < ye and xs < xe:
                out[ys:ye, xs:xe] = 0
    return out


def _t_coarse_dropout(img, rng, ranges):
    out = img.copy()
    h, w = img.shape[:2]
    count = _uniform_int(rng, ranges["count"])
    for _ in range(count):
        bw = max(1, int(_uniform(rng, ranges["extent"]) * w))
        bh = max(1, int(_uniform(rng, ranges["extent"]) * h))
        x0 = int(rng.integers(0, max(w - bw, 0) + 1))
        y0 = int(rng.integers(0, max(h - bh, 0) + 1))
        out[y0 : y0 + bh, x0 : x0 + bw] = 0
    return out


_TRANSFORMS: dict[str, Callable] = {
    "box_blur": _t_box_blur,
    "median_blur": _t_median_blur,
    "gaussian_blur": _t_gaussian_blur,
    "gaussian_noise": _t_gaussian_noise,
    "iso_noise": _t_iso_noise,
    "motion_blur": _t_motion_blur,
    "color_jitter": _t_color_jitter,
    "jpeg_reencode": _t_jpeg_reencode,
    "rgb_shift": _t_rgb_shift,
    "to_gray": _t_to_gray,
    "pixel_dropout": _t_pixel_dropout,
    "hsv_jitter": _t_hsv_jitter,
    "brightness_jitter": _t_brightness_jitter,
    "contrast_jitter": _t_contrast_jitter,
    "gamma_jitter": _t_gamma_jitter,
    "shadow_polygon": _t_shadow_polygon,
    "xy_masking": _t_xy_masking,
    "grid_dropout": _t_grid_dropout,
    "coarse_dropout": _t_coarse_dropout,
}

assert set(_TRANSFORMS) == set(PARAM_RANGES)


def export_augmented(
    dataset: DatasetIndex,
    images_root: str | Path,
    pipeline: AugmentationPipeline,
    copies: int,
    out_root: str | Path,
    global_seed: int,
) -> list[dict]:
    """Write ``copies`` augmented variants of every image plus a remapped
    annotations file; returns the manifest rows that were written."""
    if copies < 1:
        raise ValueError(f"copies must be >= 1, got {copies}")
    images_root = Path(images_root)
    out_root = Path(out_root)
    out_root.mkdir(parents=True, exist_ok=True)

    manifest: list[dict] = []
    out_images = []
    out_annotations = []
    next_image_id = 1
    next_ann_id = 1

    for record in sorted(dataset.images, key=lambda r: r.id):
        source_path = images_root / record.file_name
        img = load_image(source_path)
        for copy_index in range(copies):
            seed = derive_seed(global_seed, record.id, "augment", copy_index + 1)
            augmented, fired = apply_pipeline_traced(pipeline, img, seed)
            stem = Path(record.file_name).stem
            out_name = f"{stem}_aug{copy_index}.png"
            out_path = out_root / "images" / out_name
            save_png(augmented, out_path)

            out_images.append(
                {
                    "id": next_image_id,
                    "file_name": f"images/{out_name}",
                    "width": record.width,
                    "height": record.height,
                }
            )
            for ann in dataset.by_image.get(record.id, ()):
                out_annotations.append(
                    {
                        "id": next_ann_id,
                        "image_id": next_image_id,
                        "category_id": ann.category_id,
                        "keypoints": list(ann.keypoints),
                        "num_keypoints": ann.num_keypoints,
                        "area": ann.area,
                        "bbox": list(ann.bbox),
                        "iscrowd": ann.iscrowd,
                    }
                )
                next_ann_id += 1
            manifest.append(
                {
                    "source_path": str(source_path),
                    "output_path": str(out_path),
                    "seed": seed,
                    "transforms_fired": "+".join(fired),
                }
            )
            next_image_id += 1

    annotations_payload = {
        "images": out_images,
        "annotations": out_annotations,
        "categories": dataset.to_json()["categories"],
    }
    with open(out_root / "annotations.json", "w") as fh:
        json.dump(annotations_payload, fh)

    with open(out_root / "manifest.csv", "w", newline="") as fh:
        writer = csv.DictWriter(
            fh, fieldnames=["source_path", "output_path", "seed", "transforms_fired"]
        )
        writer.writeheader()
        writer.writerows(manifest)
    return manifest
