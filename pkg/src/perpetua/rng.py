"""Seeded generator streams.

Stream ``i`` of a run with root seed ``s`` is seeded with
``s XOR (i * 0x9E3779B97F4A7C15 mod 2**64)``. Monte Carlo work is cut into
fixed-size chunks and chunk ``i`` always draws from stream ``i``, so merged
counts do not depend on how chunks are distributed over workers.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Iterable, TypeVar

import numpy as np

GOLDEN_GAMMA = 0x9E3779B97F4A7C15
_MASK64 = (1 << 64) - 1
CHUNK = 1 << 20

T = TypeVar("T")


def stream_seed(root_seed: int, index: int) -> int:
    return (int(root_seed) & _MASK64) ^ ((int(index) * GOLDEN_GAMMA) & _MASK64)


def stream(root_seed: int, index: int) -> np.random.Generator:
    return np.random.default_rng(stream_seed(root_seed, index))


def as_generator(rng) -> np.random.Generator:
    if isinstance(rng, np.random.Generator):
        return rng
    return np.random.default_rng(rng)


def default_workers() -> int:
    return os.cpu_count() or 1


def chunk_sizes(n: int, chunk: int = CHUNK) -> list[int]:
    full, rest = divmod(int(n), chunk)
    return [chunk] * full + ([rest] if rest else [])


def map_chunks(fn: Callable[[int, np.random.Generator], T], n: int, seed: int,
               workers: int | None = None, chunk: int = CHUNK) -> list[T]:
    """Run ``fn(size, rng)`` over the chunks of ``n`` draws, in chunk order."""
    sizes = chunk_sizes(n, chunk)
    jobs: Iterable = ((m, stream(seed, i)) for i, m in enumerate(sizes))
    workers = workers or default_workers()
    if workers <= 1 or len(sizes) <= 1:
        return [fn(m, g) for m, g in jobs]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(lambda job: fn(*job), jobs))
