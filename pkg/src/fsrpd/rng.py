"""Deterministic random streams.

All randomness in this package flows through numpy ``Generator`` objects
seeded from a single 64-bit master seed.  Per-trial streams are derived with
splitmix64, so trial i is reproducible regardless of how trials are sharded
across worker processes:

    stream(seed, *path) = PCG64(splitmix64 folded over (seed, path...))

``path`` is a short tuple of integers, by convention (domain, trial_index).
Domain constants keep unrelated consumers of the same master seed (e.g. the
experiment trials and their reference draws) on disjoint streams.
"""

from __future__ import annotations

import numpy as np

_MASK64 = (1 << 64) - 1
_GAMMA = 0x9E3779B97F4A7C15  # 2^64 / golden ratio

DOMAIN_TRIAL = 0
DOMAIN_REFERENCE = 1
DOMAIN_AUX = 2


def splitmix64(x: int) -> int:
    """One splitmix64 step; the documented mixing function for stream keys."""
    x = (x + _GAMMA) & _MASK64
    z = x
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return z ^ (z >> 31)


def stream_key(seed: int, *path: int) -> int:
    """Fold ``path`` into ``seed``, one splitmix64 step per component."""
    key = splitmix64(seed & _MASK64)
    for part in path:
        key = splitmix64(key ^ (part & _MASK64))
    return key


def make_rng(seed: int, *path: int) -> np.random.Generator:
    """A PCG64 generator on the stream addressed by (seed, path)."""
    return np.random.Generator(np.random.PCG64(stream_key(seed, *path)))
