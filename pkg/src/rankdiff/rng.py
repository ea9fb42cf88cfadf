"""Seed handling and deterministic parallel maps.

Every replicate draws from its own stream, keyed by (master seed, label,
replicate index), so results never depend on how work is split across
threads.
"""

from __future__ import annotations

import os
import zlib
from concurrent.futures import ThreadPoolExecutor

import numpy as np

DEFAULT_BLOCK = 256


def _key(part):
    if isinstance(part, str):
        return zlib.crc32(part.encode())
    return int(part)


def as_seed_sequence(seed) -> np.random.SeedSequence:
    if isinstance(seed, np.random.SeedSequence):
        return seed
    if isinstance(seed, np.random.Generator):
        return seed.bit_generator.seed_seq
    if seed is None:
        raise ValueError("a master seed is required")
    return np.random.SeedSequence(int(seed))


def child(seed, *key) -> np.random.SeedSequence:
    """Seed sequence for the sub-stream ``key`` under ``seed``."""
    ss = as_seed_sequence(seed)
    return np.random.SeedSequence(
        ss.entropy, spawn_key=tuple(ss.spawn_key) + tuple(_key(k) for k in key)
    )


def substream(seed, *key) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(child(seed, *key)))


def as_generator(rng) -> np.random.Generator:
    if isinstance(rng, np.random.Generator):
        return rng
    return np.random.Generator(np.random.PCG64(as_seed_sequence(rng)))


def resolve_threads(threads=None) -> int:
    if threads is None:
        env = os.environ.get("RANKDIFF_THREADS")
        threads = int(env) if env else (os.cpu_count() or 1)
    return max(1, int(threads))


def blocks(total: int, size: int = DEFAULT_BLOCK):
    return [(start, min(start + size, total)) for start in range(0, total, size)]


def ordered_map(func, items, threads=1):
    """map() whose output order is the input order for any pool size."""
    items = list(items)
    threads = resolve_threads(threads)
    if threads == 1 or len(items) <= 1:
        return [func(item) for item in items]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(func, items))
