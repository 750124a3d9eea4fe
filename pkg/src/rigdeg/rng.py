"""Per-replication random streams.

Every replication owns one :class:`numpy.random.Generator` derived from
``(base_seed, replication_index)`` through :class:`numpy.random.SeedSequence`
spawn keys, so a replication's draws do not depend on how replications are
split across workers or in which order they run.
"""

from __future__ import annotations

import numpy as np


def replication_rng(base_seed: int, index: int) -> np.random.Generator:
    ss = np.random.SeedSequence(int(base_seed), spawn_key=(int(index),))
    return np.random.Generator(np.random.PCG64(ss))


def chunk_bounds(total: int, n_chunks: int) -> list[tuple[int, int]]:
    """Split ``range(total)`` into at most ``n_chunks`` contiguous half-open ranges."""
    n_chunks = max(1, min(int(n_chunks), int(total))) if total else 1
    edges = np.linspace(0, total, n_chunks + 1).round().astype(int)
    return [(int(a), int(b)) for a, b in zip(edges[:-1], edges[1:]) if b > a]
