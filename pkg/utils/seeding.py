"""
Deterministic seed derivation for task-level fan-out.

Every random draw in the engine comes from a generator seeded by
``derive_seed(base_seed, *task_keys)``, so results depend only on the base
seed and the task identity, never on execution order or worker count.
"""

from typing import Union

import numpy as np

Seed = Union[int, np.integer]


def derive_seed(base_seed: Seed, *keys: int) -> int:
    """Map a base seed and non-negative task keys to a 64-bit child seed."""
    if any(int(k) < 0 for k in keys):
        raise ValueError(f"seed keys must be non-negative, got {keys}")
    sequence = np.random.SeedSequence(int(base_seed), spawn_key=tuple(int(k) for k in keys))
    return int(sequence.generate_state(1, dtype=np.uint64)[0])


def rng(seed: Seed) -> np.random.Generator:
    """Create a generator for one task."""
    return np.random.default_rng(int(seed))
