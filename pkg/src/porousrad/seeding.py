"""Deterministic sharded RNG streams for parallel Monte Carlo.

Work is split into fixed-size shards, never per-worker chunks.  Shard ``i``
of a run always gets the generator derived from
``SeedSequence(master_seed, spawn_key=(i,))`` and always simulates the same
rays, so partial results are reproducible no matter how many workers pick
shards up or in what order.  Merging is done in shard order by the callers,
which makes every tally bit-identical across worker counts.
"""

from __future__ import annotations

import numpy as np

__all__ = ["SHARD_SIZE", "shard_sizes", "shard_rng", "shard_plan"]

# Rays per shard.  Small enough that outcome buffers stay cache-friendly,
# large enough that per-shard kernel launch overhead is negligible.
SHARD_SIZE = 1 << 16


def shard_sizes(n: int, shard_size: int = SHARD_SIZE) -> list[int]:
    """Split n items into fixed-size shards (last one ragged)."""
    if n < 0:
        raise ValueError("n must be nonnegative")
    full, rem = divmod(n, shard_size)
    sizes = [shard_size] * full
    if rem:
        sizes.append(rem)
    return sizes


def shard_rng(master_seed: int, shard_index: int) -> np.random.Generator:
    """The generator owned by one shard of one run."""
    ss = np.random.SeedSequence(master_seed, spawn_key=(shard_index,))
    return np.random.Generator(np.random.PCG64(ss))


def shard_plan(n: int, master_seed: int, shard_size: int = SHARD_SIZE):
    """Yield (shard_index, shard_n, rng) for a run of n items."""
    for i, m in enumerate(shard_sizes(n, shard_size)):
        yield i, m, shard_rng(master_seed, i)
