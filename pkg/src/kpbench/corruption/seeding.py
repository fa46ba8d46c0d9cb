"""Deterministic seed derivation for per-image corruption streams.

Every randomized operator receives a 64-bit seed derived from
``(global_seed, image_id, corruption name, severity)`` through a fixed,
platform-independent hash chain, so a corrupted dataset can be rebuilt
byte-for-byte from its inputs.
"""

from __future__ import annotations

import numpy as np

_MASK64 = 0xFFFFFFFFFFFFFFFF

_FNV_OFFSET = 0xCBF29CE484222325
_FNV_PRIME = 0x00000100000001B3


def fnv1a_64(data: bytes) -> int:
    """64-bit FNV-1a hash of a byte string."""
    h = _FNV_OFFSET
    for byte in data:
        h ^= byte
        h = (h * _FNV_PRIME) & _MASK64
    return h


def splitmix64(x: int) -> int:
    """One splitmix64 step applied to ``x`` as the generator state."""
    z = (x + 0x9E3779B97F4A7C15) & _MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return z ^ (z >> 31)


def derive_seed(global_seed: int, image_id: int, kind_name: str, severity: int) -> int:
    """Per-image, per-cell seed: splitmix64 of the FNV-1a hash of the
    canonical string ``"<global_seed>/<image_id>/<kind-name>/<severity>"``.
    """
    canonical = f"{global_seed}/{image_id}/{kind_name}/{severity}"
    return splitmix64(fnv1a_64(canonical.encode("utf-8")))


def derive_stream_seed(seed: int, index: int, label: str) -> int:
    """Sub-stream seed for step ``index``/``label`` of a composite pipeline.

    Same hash chain as :func:`derive_seed` so sub-streams inherit its
    portability guarantees.
    """
    return splitmix64(fnv1a_64(f"{seed}/{index}/{label}".encode("utf-8")))


def rng_from_seed(seed: int) -> np.random.Generator:
    """PCG64 generator for a derived seed. PCG64 is pinned (not the numpy
    default alias) so streams stay stable across numpy releases."""
    return np.random.Generator(np.random.PCG64(seed))
