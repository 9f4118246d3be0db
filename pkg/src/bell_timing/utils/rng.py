"""Deterministic per-chunk RNG streams for Monte Carlo runs.

A run of n pairs is cut into fixed-size chunks; chunk k draws from
SeedSequence([master_seed, k]). The chunk layout is part of the seed contract,
so results do not depend on how many workers process the chunks.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class Chunk:
    """A contiguous slice of a run with its own random stream."""

    index: int
    start: int
    size: int


def plan_chunks(n_pairs: int, chunk_size: int) -> list[Chunk]:
    """Split ``n_pairs`` into consecutive chunks of ``chunk_size`` (last one shorter)."""
    if n_pairs < 0:
        raise ValueError(f"n_pairs must be nonnegative, got {n_pairs}")
    if chunk_size <= 0:
        raise ValueError(f"chunk_size must be positive, got {chunk_size}")
    chunks = []
    for index, start in enumerate(range(0, n_pairs, chunk_size)):
        chunks.append(Chunk(index=index, start=start, size=min(chunk_size, n_pairs - start)))
    return chunks


def chunk_generator(master_seed: int, chunk_index: int) -> np.random.Generator:
    """Independent generator for one chunk of one run."""
    return np.random.default_rng(np.random.SeedSequence([int(master_seed), int(chunk_index)]))
