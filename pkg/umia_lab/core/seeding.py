"""Seed derivation so every stage draws from its own reproducible stream."""

from __future__ import annotations

import zlib

import numpy as np

from .errors import ConfigurationError

_UINT64_MAX = 2**64 - 1


def _key_to_int(key: int | str) -> int:
    if isinstance(key, str):
        return zlib.crc32(key.encode("utf-8"))
    if key < 0:
        raise ConfigurationError(f"seed keys must be non-negative, got {key}")
    return int(key)


def check_seed(seed: int) -> int:
    if not 0 <= int(seed) <= _UINT64_MAX:
        raise ConfigurationError(f"seed must be a 64-bit unsigned integer, got {seed}")
    return int(seed)


def derive_seed(seed: int, *keys: int | str) -> int:
    """Return a 64-bit seed that depends only on ``seed`` and the ``keys`` path."""

    sequence = np.random.SeedSequence(
        entropy=check_seed(seed),
        spawn_key=tuple(_key_to_int(key) for key in keys),
    )
    low, high = sequence.generate_state(2, dtype=np.uint32)
    return (int(high) << 32) | int(low)


def rng_for(seed: int, *keys: int | str) -> np.random.Generator:
    return np.random.default_rng(derive_seed(seed, *keys))
