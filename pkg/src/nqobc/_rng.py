"""Seeded random streams.

Every stochastic routine takes a 64-bit master seed and derives its own
Philox (counter-based) stream from it, keyed by a tuple of non-negative
integers (restart index, shard index, ...). Streams with distinct keys are
independent, and a given (seed, key) always yields the same numbers, so
results do not depend on how work is scheduled.
"""

import numpy as np

SEED_MASK = (1 << 64) - 1


def normalize_seed(seed):
    """Map any Python int onto the unsigned 64-bit range."""
    return int(seed) & SEED_MASK


def stream(seed, *key):
    ss = np.random.SeedSequence(entropy=normalize_seed(seed), spawn_key=tuple(int(k) for k in key))
    return np.random.Generator(np.random.Philox(ss))


def derive_seed(seed, *key):
    """A 64-bit child seed, deterministic in (seed, key)."""
    ss = np.random.SeedSequence(entropy=normalize_seed(seed), spawn_key=tuple(int(k) for k in key))
    lo, hi = ss.generate_state(2, dtype=np.uint32)
    return int(lo) | (int(hi) << 32)
