"""Counter-based stream derivation for reproducible replicate-parallel runs.

Every replicate (and every distinct purpose within a replicate, e.g. the
field draw vs. the shared mixing variable) gets its own Philox stream keyed
by ``(master_seed, *path)``.  Streams are independent of execution order and
worker count, so any chunking of the replicate range reproduces the same
numbers bit for bit.
"""

from __future__ import annotations

import numpy as np

__all__ = ["child_seed", "stream"]


def child_seed(master: int, *path: int) -> int:
    """Derive a stable 64-bit child seed from a master seed and an index path."""
    ss = np.random.SeedSequence(int(master), spawn_key=tuple(int(p) for p in path))
    return int(ss.generate_state(1, np.uint64)[0])


def stream(seed: int, *path: int) -> np.random.Generator:
    """Counter-based generator for ``(seed, *path)``; same inputs, same stream."""
    ss = np.random.SeedSequence(int(seed), spawn_key=tuple(int(p) for p in path))
    return np.random.Generator(np.random.Philox(ss))
