"""Deterministic seed derivation for nested experiment loops."""

import numpy as np


def derive_seed(base_seed: int, *path: int) -> int:
    """63-bit seed for ``path`` under ``base_seed``, independent of call order."""
    state = np.random.SeedSequence([int(base_seed), *map(int, path)]).generate_state(2, np.uint32)
    return (int(state[0]) << 31) ^ int(state[1])
