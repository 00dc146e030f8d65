"""Deterministic RNG stream derivation.

All randomness in the package flows from a single master seed through
keyed `SeedSequence` children, so results never depend on execution
order or thread count. Key tuples are namespaced by purpose.
"""

import numpy as np

# Namespace constants for the first key component.
POPULATION = 0
DESIGN = 1
ANALYSIS = 2
REPLICATE = 3


def substream(master_seed: int, *key: int) -> np.random.Generator:
    """Return a generator for the child stream identified by `key`.

    The same (master_seed, key) always yields the same stream, and
    distinct keys yield statistically independent streams.
    """
    return np.random.default_rng(np.random.SeedSequence(master_seed, spawn_key=key))
