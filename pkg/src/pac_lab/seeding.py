"""Reproducible random streams.

Every trial gets its own counter-based Philox stream whose seed is derived
from ``(master_seed, trial_index, ...)``.  A trial can therefore be replayed
from its derived seed alone, in any order or in parallel.
"""
from __future__ import annotations

import numpy as np


def derive_seed(master: int, *index: int) -> int:
    """64-bit seed for the substream identified by ``(master, *index)``."""
    ss = np.random.SeedSequence([int(master), *map(int, index)])
    return int(ss.generate_state(1, np.uint64)[0])


def make_rng(seed) -> np.random.Generator:
    """Philox generator from an int seed; Generators pass through unchanged."""
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.Generator(np.random.Philox(int(seed)))


def trial_rng(master: int, *index: int) -> np.random.Generator:
    return make_rng(derive_seed(master, *index))
