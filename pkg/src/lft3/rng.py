"""Seeded random generator construction shared across the package."""

import numpy as np

_MASK64 = (1 << 64) - 1


def make_rng(*words: int) -> np.random.Generator:
    """Build a deterministic PCG64 generator from one or more integer seed words.

    Negative words are mapped through a 64-bit mask so callers may pass any
    Python integer. The word sequence is the identity of the stream:
    make_rng(7) and make_rng(7, 0) are different generators.
    """
    entropy = [int(w) & _MASK64 for w in words]
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(entropy)))
