"""Severity-table dispatch: resolve parameters, derive the seed, corrupt."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping, Optional, Sequence

import numpy as np

from . import ops
from .seeding import derive_seed
from .severity import (
    CorruptionKind,
    DatasetProfile,
    check_severity,
    lookup_params,
    mask_size_for,
)


@dataclass(frozen=True)
class CorruptionSpec:
    """One cell of the benchmark grid, plus the determinism context.

    ``image_id`` feeds the per-image seed derivation; batch runs set it to
    the COCO image id so every image gets its own stream. ``overrides`` may
    replace resolved parameters (keys: ``noise_gain``, ``mask_fill``, plus
    the operator parameter names themselves, e.g. ``sigma`` or ``quality``).
    """

    kind: CorruptionKind
    severity: int
    global_seed: int = 0
    dataset_profile: DatasetProfile = DatasetProfile.COCO
    image_id: int = 0
    overrides: Mapping[str, object] = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "kind", CorruptionKind(self.kind))
        object.__setattr__(self, "dataset_profile", DatasetProfile(self.dataset_profile))
        check_severity(self.severity)

    def seed(self) -> int:
        return derive_seed(self.global_seed, self.image_id, self.kind.value, self.severity)


def apply(
    img: np.ndarray,
    spec: CorruptionSpec,
    targets: Optional[Sequence[tuple]] = None,
) -> np.ndarray:
    """Apply the corruption described by ``spec``; pure in (img, spec, targets)."""
    kind = spec.kind
    ov = spec.overrides
    seed = spec.seed()

    if kind is CorruptionKind.MASK:
        if targets is None:
            raise ValueError("mask corruption requires keypoint targets")
        size = ov.get("size", mask_size_for(spec.severity, spec.dataset_profile))
        fill = ov.get("mask_fill", 0)
        return ops.keypoint_mask(img, targets, int(size), int(fill))

    params = lookup_params(kind, spec.severity)
    if kind is CorruptionKind.MOTION_BLUR:
        radius, sigma = params
        return ops.motion_blur(
            img, int(ov.get("radius", radius)), float(ov.get("sigma", sigma)), seed
        )
    if kind is CorruptionKind.GAUSSIAN_NOISE:
        return ops.gaussian_noise(
            img,
            float(ov.get("sigma", params)),
            float(ov.get("noise_gain", 1.0)),
            seed=seed,
        )
    if kind is CorruptionKind.IMPULSE_NOISE:
        return ops.impulse_noise(img, float(ov.get("proportion", params)), seed)
    if kind is CorruptionKind.PIXELATE:
        return ops.pixelate(img, float(ov.get("ratio", params)))
    if kind is CorruptionKind.JPEG_COMPRESSION:
        return ops.jpeg_compress(img, int(ov.get("quality", params)))
    if kind is CorruptionKind.COLOR_QUANT:
        return ops.color_quant(img, int(ov.get("bits", params)))
    if kind is CorruptionKind.BRIGHTNESS:
        return ops.brightness(img, float(ov.get("delta_v", params)))
    if kind is CorruptionKind.DARKNESS:
        return ops.darkness(img, float(ov.get("gamma", params)))
    if kind is CorruptionKind.CONTRAST:
        return ops.contrast(img, float(ov.get("c", params)))
    raise AssertionError(f"unhandled corruption kind {kind!r}")
