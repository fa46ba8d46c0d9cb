"""Corruption taxonomy and the per-severity parameter table.

Ten corruption kinds, four groups, five severity levels each. The parameter
values are the benchmark's contract: changing any entry changes every
corrupted dataset built from it.
"""

from __future__ import annotations

import enum


class CorruptionKind(str, enum.Enum):
    MOTION_BLUR = "motion_blur"
    GAUSSIAN_NOISE = "gaussian_noise"
    IMPULSE_NOISE = "impulse_noise"
    PIXELATE = "pixelate"
    JPEG_COMPRESSION = "jpeg_compression"
    COLOR_QUANT = "color_quant"
    BRIGHTNESS = "brightness"
    DARKNESS = "darkness"
    CONTRAST = "contrast"
    MASK = "mask"

    def __str__(self) -> str:  # pragma: no cover - cosmetic
        return self.value


class DatasetProfile(str, enum.Enum):
    COCO = "coco"
    OCHUMAN = "ochuman"
    AP10K = "ap10k"

    def __str__(self) -> str:  # pragma: no cover - cosmetic
        return self.value


BLUR_NOISE_GROUP = "Blur & Noise"
COMPRESSION_COLOR_GROUP = "Compression & Color"
LIGHTNING_GROUP = "Lightning"
MASK_GROUP = "Mask"

GROUP_NAMES = (
    BLUR_NOISE_GROUP,
    COMPRESSION_COLOR_GROUP,
    LIGHTNING_GROUP,
    MASK_GROUP,
)

#: kind -> report group, in benchmark column order
CORRUPTION_GROUPS: dict[CorruptionKind, str] = {
    CorruptionKind.MOTION_BLUR: BLUR_NOISE_GROUP,
    CorruptionKind.GAUSSIAN_NOISE: BLUR_NOISE_GROUP,
    CorruptionKind.IMPULSE_NOISE: BLUR_NOISE_GROUP,
    CorruptionKind.PIXELATE: COMPRESSION_COLOR_GROUP,
    CorruptionKind.JPEG_COMPRESSION: COMPRESSION_COLOR_GROUP,
    CorruptionKind.COLOR_QUANT: COMPRESSION_COLOR_GROUP,
    CorruptionKind.BRIGHTNESS: LIGHTNING_GROUP,
    CorruptionKind.DARKNESS: LIGHTNING_GROUP,
    CorruptionKind.CONTRAST: LIGHTNING_GROUP,
    CorruptionKind.MASK: MASK_GROUP,
}

ALL_KINDS = tuple(CorruptionKind)
SEVERITY_LEVELS = (1, 2, 3, 4, 5)

#: (kind, level) -> parameter tuple; mask sizes are keyed by dataset profile
#: through MASK_SIZES below.
SEVERITY_TABLE: dict[CorruptionKind, tuple] = {
    CorruptionKind.MOTION_BLUR: ((10, 3), (15, 5), (15, 8), (15, 12), (20, 15)),
    CorruptionKind.GAUSSIAN_NOISE: (1, 2, 3, 4, 6),
    CorruptionKind.IMPULSE_NOISE: (3, 6, 9, 17, 27),
    CorruptionKind.PIXELATE: (60, 50, 40, 30, 25),
    CorruptionKind.JPEG_COMPRESSION: (25, 18, 15, 10, 7),
    CorruptionKind.COLOR_QUANT: (5, 4, 3, 2, 1),
    CorruptionKind.BRIGHTNESS: (0.1, 0.2, 0.3, 0.4, 0.5),
    CorruptionKind.DARKNESS: (0.6, 0.5, 0.4, 0.3, 0.2),
    CorruptionKind.CONTRAST: (0.4, 0.3, 0.2, 0.1, 0.05),
    # (COCO, OCHuman, AP10K) square side per level
    CorruptionKind.MASK: ((5, 20, 20), (10, 25, 25), (15, 30, 30), (20, 35, 35), (25, 40, 40)),
}

_PROFILE_COLUMN = {
    DatasetProfile.COCO: 0,
    DatasetProfile.OCHUMAN: 1,
    DatasetProfile.AP10K: 2,
}


def check_severity(severity: int) -> int:
    if not isinstance(severity, int) or isinstance(severity, bool):
        raise ValueError(f"severity must be an integer, got {severity!r}")
    if not 1 <= severity <= 5:
        raise ValueError(f"severity out of range: {severity} (valid range is 1..5)")
    return severity


def lookup_params(kind: CorruptionKind, severity: int):
    """Exact parameter tuple for ``(kind, severity)``.

    For MASK the entry is the (COCO, OCHuman, AP10K) size triple; use
    :func:`mask_size_for` to pick one profile's size.
    """
    check_severity(severity)
    return SEVERITY_TABLE[CorruptionKind(kind)][severity - 1]


def mask_size_for(severity: int, profile: DatasetProfile) -> int:
    sizes = lookup_params(CorruptionKind.MASK, severity)
    try:
        column = _PROFILE_COLUMN[DatasetProfile(profile)]
    except ValueError:
        raise ValueError(
            f"unknown dataset profile {profile!r}; expected one of "
            f"{[p.value for p in DatasetProfile]}"
        ) from None
    return sizes[column]


def parse_kind(name: str) -> CorruptionKind:
    """Case-insensitive corruption name lookup with a helpful error."""
    try:
        return CorruptionKind(str(name).strip().lower())
    except ValueError:
        valid = ", ".join(k.value for k in ALL_KINDS)
        raise ValueError(f"unknown corruption kind {name!r}; valid kinds: {valid}") from None
