from .engine import CorruptionSpec, apply
from .ops import (
    brightness,
    color_quant,
    contrast,
    darkness,
    gaussian_noise,
    impulse_noise,
    jpeg_compress,
    keypoint_mask,
    motion_blur,
    pixelate,
)
from .seeding import derive_seed, derive_stream_seed, fnv1a_64, rng_from_seed, splitmix64
from .severity import (
    ALL_KINDS,
    CORRUPTION_GROUPS,
    GROUP_NAMES,
    SEVERITY_LEVELS,
    SEVERITY_TABLE,
    CorruptionKind,
    DatasetProfile,
    lookup_params,
    mask_size_for,
    parse_kind,
)

__all__ = [
    "ALL_KINDS",
    "CORRUPTION_GROUPS",
    "GROUP_NAMES",
    "SEVERITY_LEVELS",
    "SEVERITY_TABLE",
    "CorruptionKind",
    "CorruptionSpec",
    "DatasetProfile",
    "apply",
    "brightness",
    "color_quant",
    "contrast",
    "darkness",
    "derive_seed",
    "derive_stream_seed",
    "fnv1a_64",
    "gaussian_noise",
    "impulse_noise",
    "jpeg_compress",
    "keypoint_mask",
    "lookup_params",
    "mask_size_for",
    "motion_blur",
    "parse_kind",
    "pixelate",
    "rng_from_seed",
    "splitmix64",
]
