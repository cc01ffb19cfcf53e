"""Keyed 64-bit hashing shared by every component that needs reproducible randomness.

Edge ranks for random-greedy matching, per-vertex sampling seeds and per-trial
seeds are all derived here, so that a local oracle and a global simulation
that use the same seed see exactly the same random order.
"""

from __future__ import annotations

import numpy as np

MASK64 = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15
_M1 = 0xBF58476D1CE4E5B9
_M2 = 0x94D049BB133111EB
_INV_2_53 = 1.0 / (1 << 53)


def splitmix64(x: int) -> int:
    z = (x + _GOLDEN) & MASK64
    z = ((z ^ (z >> 30)) * _M1) & MASK64
    z = ((z ^ (z >> 27)) * _M2) & MASK64
    return z ^ (z >> 31)


def hash64(seed: int, *values: int) -> int:
    """Hash ``seed`` and a sequence of non-negative ints to a 64-bit integer."""
    h = splitmix64(seed & MASK64)
    for x in values:
        h = splitmix64(h ^ (x & MASK64))
    return h


def to_unit(h: int) -> float:
    """Map a 64-bit hash to a float in [0, 1)."""
    return (h >> 11) * _INV_2_53


def derive_seed(base_seed: int, *values: int) -> int:
    """Child seed for trial ``i`` (or any other tagged sub-stream); fits in 63 bits."""
    return hash64(base_seed, *values) >> 1


def _splitmix64_np(x: np.ndarray) -> np.ndarray:
    z = x + np.uint64(_GOLDEN)
    z = (z ^ (z >> np.uint64(30))) * np.uint64(_M1)
    z = (z ^ (z >> np.uint64(27))) * np.uint64(_M2)
    return z ^ (z >> np.uint64(31))


def hash64_array(seed: int, *columns: np.ndarray) -> np.ndarray:
    """Vectorised :func:`hash64`; each column is an integer array of equal length.

    ``hash64_array(s, a, b)[i] == hash64(s, a[i], b[i])`` for every ``i``.
    """
    cols = [np.asarray(c).astype(np.uint64) for c in columns]
    size = cols[0].shape[0] if cols else 1
    with np.errstate(over="ignore"):
        h = np.full(size, splitmix64(seed & MASK64), dtype=np.uint64)
        for c in cols:
            h = _splitmix64_np(h ^ c)
    return h
