"""Counter-based random streams.

Every random quantity in the package is drawn from a Philox stream keyed by
``(seed, *path)``, so a particle, trial chunk or grid point always sees the
same numbers no matter which worker runs it or in what order.
"""
from __future__ import annotations

import hashlib
import struct

import numpy as np

MASK64 = (1 << 64) - 1


def substream(seed: int, *path: int) -> np.random.Generator:
    """Independent Philox generator for the stream ``(seed, *path)``."""
    words = [int(seed) & MASK64] + [int(p) & MASK64 for p in path]
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(words)))


def derive_seed(master: int, *path: int) -> int:
    """Stable 63-bit seed from a master seed and integer path (blake2b)."""
    payload = struct.pack(f"<{1 + len(path)}Q", int(master) & MASK64, *(int(p) & MASK64 for p in path))
    digest = hashlib.blake2b(payload, digest_size=8, person=b"cliquepk").digest()
    return int.from_bytes(digest, "little") >> 1


def draw_ksets(rng: np.random.Generator, count: int, n: int, k: int) -> np.ndarray:
    """``count`` independent uniform k-subsets of range(n), one per row.

    Vectorised partial Fisher-Yates: the first k positions of a shuffled
    row.  Row entries are in draw order, not sorted.
    """
    perm = np.tile(np.arange(n, dtype=np.int64), (count, 1))
    rows = np.arange(count)
    for j in range(k):
        r = rng.integers(j, n, size=count)
        a = perm[rows, j].copy()
        perm[rows, j] = perm[rows, r]
        perm[rows, r] = a
    return perm[:, :k]


def indicator(idx: np.ndarray, n: int) -> np.ndarray:
    """Row-wise 0/1 membership matrix for an index array of shape (..., k)."""
    out = np.zeros(idx.shape[:-1] + (n,))
    np.put_along_axis(out, idx, 1.0, axis=-1)
    return out
