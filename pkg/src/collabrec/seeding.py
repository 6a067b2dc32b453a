"""Deterministic derivation of sub-seeds for experiment stages.

The harness gives each repetition a root seed (``base_seed + rep_index``)
and derives one independent stream per stage (split, partition, anchor,
each trained model) with a splitmix64 mix, so any stage can be re-run in
isolation and two runs with the same base seed are identical.
"""

from __future__ import annotations

_MASK = (1 << 64) - 1

# Stage tags fed into derive_seed. Learner seeds additionally mix in the
# learner code, party count, representation dimensions, and party index.
ROLE_SPLIT = 1
ROLE_PARTITION = 2
ROLE_ANCHOR = 3
ROLE_LEARNER = 4


def splitmix64(state: int) -> int:
    """One output of the splitmix64 generator for a 64-bit state."""
    z = (state + 0x9E3779B97F4A7C15) & _MASK
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK
    return z ^ (z >> 31)


def derive_seed(root: int, *path: int) -> int:
    """Fold a sequence of stage tags into ``root``, returning a 64-bit seed.

    Distinct paths give statistically independent seeds; the same path
    always gives the same seed.
    """
    seed = root & _MASK
    for part in path:
        seed = splitmix64(seed ^ splitmix64(part & _MASK))
    return seed
