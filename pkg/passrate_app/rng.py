"""
Seedable, splittable random streams.

Every randomized operation receives a numpy Generator. Independent pieces of
work (Monte Carlo iterations, experiments, synthetic terms) get child streams
spawned from one SeedSequence, so a run is reproducible whether the children
are consumed sequentially or concurrently.
"""
from typing import List, Optional

import numpy as np


def get_rng(seed: Optional[int]) -> np.random.Generator:
    """
    Get a numpy random generator with specified seed.

    Args:
        seed: Random seed (None draws fresh OS entropy)

    Returns:
        numpy Generator instance
    """
    return np.random.default_rng(seed)


def spawn_rngs(seed: int, count: int) -> List[np.random.Generator]:
    """
    Derive `count` independent generators from one root seed.

    Args:
        seed: Root seed
        count: Number of child streams

    Returns:
        List of generators, child i always seeded identically for a given root
    """
    children = np.random.SeedSequence(seed).spawn(count)
    return [np.random.default_rng(child) for child in children]


def derive_seed(seed: int, index: int) -> int:
    """Stable 63-bit child seed for the index-th sub-task of `seed`."""
    child = np.random.SeedSequence(seed, spawn_key=(index,))
    return int(child.generate_state(1, dtype=np.uint64)[0] >> np.uint64(1))


def entropy_seed() -> int:
    """Fresh seed from OS entropy, small enough to print and pass back on the CLI."""
    return int(np.random.SeedSequence().entropy % (1 << 63))
