"""Seeded random streams.

Every random draw in the package comes from NumPy's ``PCG64`` bit generator
(PCG XSL-RR 128/64), seeded through ``numpy.random.SeedSequence(seed)`` with
a 64-bit unsigned seed. Uniform doubles are taken with ``Generator.random``
(53 random bits per double), so a given seed reproduces the same stream on
every platform.

Independent sub-streams for trial ``i`` of an experiment with base seed ``s``
use the seed ``mix(s, i)``, where ``mix`` is the SplitMix64 finalizer applied
to ``s + (i + 1) * 0x9E3779B97F4A7C15 (mod 2**64)``.
"""

import numpy as np

from .errors import ValidationError

MASK64 = (1 << 64) - 1
GOLDEN_GAMMA = 0x9E3779B97F4A7C15


def splitmix64(z: int) -> int:
    z &= MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return z ^ (z >> 31)


def mix(seed: int, i: int) -> int:
    """Seed of the ``i``'th independent sub-stream of ``seed``."""
    return splitmix64((seed & MASK64) + (i + 1) * GOLDEN_GAMMA)


def check_seed(seed) -> int:
    if isinstance(seed, bool) or not isinstance(seed, (int, np.integer)):
        raise ValidationError(f"seed must be an integer, got {type(seed).__name__}")
    seed = int(seed)
    if not 0 <= seed <= MASK64:
        raise ValidationError(f"seed must fit in 64 unsigned bits, got {seed}")
    return seed


def generator(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(check_seed(seed))))
