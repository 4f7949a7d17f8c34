from __future__ import annotations

import zlib
from typing import Union

import numpy as np

from .errors import InputError

Key = Union[int, str]


def _key_to_int(key: Key) -> int:
    if isinstance(key, str):
        return zlib.crc32(key.encode("utf-8"))
    if int(key) < 0:
        raise InputError("stream keys must be non-negative")
    return int(key)


def child_rng(seed: int, *keys: Key) -> np.random.Generator:
    """
    Generator for the stream named by (seed, *keys).
    String keys hash with crc32, so the mapping is stable across processes.
    """
    entropy = [_key_to_int(seed)] + [_key_to_int(k) for k in keys]
    return np.random.default_rng(np.random.SeedSequence(entropy))
