"""Seed derivation: root seed -> component -> instance.

Every random draw in the package uses a generator seeded by
``derive_seed(root, *path)``. The path is a sequence of ints or strings
(strings are mapped through CRC32), so any sub-result can be re-derived from
the root seed and its path alone.
"""

from __future__ import annotations

import zlib

import numpy as np


def _key(part) -> int:
    if isinstance(part, (int, np.integer)):
        if part < 0:
            raise ValueError("seed path integers must be non-negative")
        return int(part)
    return zlib.crc32(str(part).encode("utf-8"))


def derive_seed(root: int, *path) -> int:
    ss = np.random.SeedSequence(int(root), spawn_key=tuple(_key(p) for p in path))
    lo, hi = ss.generate_state(2, dtype=np.uint32)
    return (int(hi) << 32 | int(lo)) & (2**63 - 1)


def rng_for(root: int, *path) -> np.random.Generator:
    return np.random.default_rng(derive_seed(root, *path))
