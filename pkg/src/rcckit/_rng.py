"""Seed derivation shared by all stochastic operations.

Every parallelizable task gets its own child seed derived from
(root seed, task index), so results never depend on execution order.
"""

import numpy as np


def child_seeds(seed: int, count: int) -> np.ndarray:
    """Return `count` uint64 child seeds derived deterministically from `seed`."""
    if count < 0:
        raise ValueError(f"count must be >= 0, got {count}")
    return np.random.SeedSequence(int(seed)).generate_state(count, np.uint64)
