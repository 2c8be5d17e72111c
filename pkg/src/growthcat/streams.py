"""Counter-based random streams.

Path ``i`` of a run seeded with ``seed`` always draws from
``stream(seed, i)``, whatever the batch split or worker count.
"""
from __future__ import annotations

import numpy as np

_MASK = (1 << 64) - 1


def stream(seed, index=0):
    key = np.array([int(seed) & _MASK, int(index) & _MASK], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))
