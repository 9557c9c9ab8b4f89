"""Seeding.

All randomness flows from a :class:`Seed` ``(value, stream)`` pair. Generators
are numpy ``Philox`` (a counter-based 4x64 generator) keyed through
``SeedSequence(value, spawn_key=(stream, *path))``. Both the key derivation
and Philox output are specified bit-for-bit by numpy, so a given seed yields
the same draws on every platform.

Sub-purposes (block labels, each modality, each clustering restart set, ...)
use distinct ``path`` tuples so their streams never overlap.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

_MASK64 = (1 << 64) - 1

# path tags, kept stable: changing them changes every sampled graph
TAU = 0
ADJACENCY = 1
EXTEND = 2
CLUSTER = 3


@dataclass(frozen=True)
class Seed:
    value: int = 0
    stream: int = 0

    def __post_init__(self):
        if not 0 <= int(self.value) <= _MASK64:
            raise ValueError(f"seed value must be a 64-bit unsigned integer, got {self.value}")
        if int(self.stream) < 0:
            raise ValueError(f"seed stream must be nonnegative, got {self.stream}")

    def generator(self, *path: int) -> np.random.Generator:
        ss = np.random.SeedSequence(int(self.value), spawn_key=(int(self.stream), *map(int, path)))
        return np.random.Generator(np.random.Philox(ss))


def as_seed(random_state) -> Seed:
    """Coerce ``None``, an int, a ``(value, stream)`` pair or a Seed to a Seed."""
    if isinstance(random_state, Seed):
        return random_state
    if random_state is None:
        return Seed(0, 0)
    if isinstance(random_state, (tuple, list)) and len(random_state) == 2:
        return Seed(int(random_state[0]), int(random_state[1]))
    if isinstance(random_state, (int, np.integer)):
        return Seed(int(random_state) & _MASK64, 0)
    raise TypeError(f"cannot build a Seed from {random_state!r}")
