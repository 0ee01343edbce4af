"""Random-number generation policy.

All randomness in the library flows through Philox, a counter-based,
seedable generator: identical seeds give identical streams on every platform,
and child streams for replications/resamples are derived arithmetically from
the base seed (replication r uses ``base_seed XOR r``, bootstrap resample b
uses ``seed + b``) so parallel work never shares a stream.
"""

from __future__ import annotations

import numpy as np

_SEED_MASK = 2**64 - 1


def make_rng(seed: int) -> np.random.Generator:
    """A Philox generator keyed by ``seed`` (reduced into the 64-bit key space)."""
    return np.random.Generator(np.random.Philox(key=int(seed) & _SEED_MASK))


def replication_seed(base_seed: int, index: int) -> int:
    """Child seed for replication ``index``: base_seed XOR index."""
    return (int(base_seed) & _SEED_MASK) ^ int(index)
