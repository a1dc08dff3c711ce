"""Seeded random streams.

Every random quantity in a simulation is derived from a single 64-bit master
seed. The master seed is split into named streams (topology base wiring,
topology spares, adverse events, switching) and each stream is further keyed
by run index, so that changing one model parameter never shifts the random
numbers consumed elsewhere.
"""

from __future__ import annotations

import numpy as np

TOPOLOGY_BASE = 1
TOPOLOGY_POTENTIAL = 2
EVENTS = 3
SWITCHING = 4

MAX_SEED = 2**64 - 1


def check_seed(seed: int) -> int:
    seed = int(seed)
    if not 0 <= seed <= MAX_SEED:
        raise ValueError(f"seed must be an unsigned 64-bit integer, got {seed}")
    return seed


def seed_sequence(seed: int, stream: int, *key: int) -> np.random.SeedSequence:
    return np.random.SeedSequence(check_seed(seed), spawn_key=(stream, *key))


def stream_rng(seed: int, stream: int, *key: int) -> np.random.Generator:
    """Return an independent PCG64 generator for ``(seed, stream, *key)``."""
    return np.random.Generator(np.random.PCG64(seed_sequence(seed, stream, *key)))


class KeyedDraws:
    """Uniform switching draws addressed by ``(run, slot, step)``.

    Backed by the Philox counter-based generator: the run selects the key and
    the step selects the counter block, so the draw for a given slot at a given
    step does not depend on how many draws were requested before it.

    Calling the object with a step ``t`` returns one uniform in ``[0, 1)`` per
    supply slot (a slot is a ``(node, required level)`` pair).
    """

    def __init__(self, seed: int, run: int, n_slots: int):
        self.n_slots = int(n_slots)
        self._key = seed_sequence(seed, SWITCHING, run).generate_state(2, np.uint64)

    def __call__(self, t: int) -> np.ndarray:
        counter = np.array([0, t, 0, 0], dtype=np.uint64)
        gen = np.random.Generator(np.random.Philox(key=self._key, counter=counter))
        return gen.random(self.n_slots)


class FixedDraws:
    """Draws taken from a fixed table, one row per step starting at ``t = 1``.

    Rows shorter than the slot count are padded with 1.0 (never switches).
    Mostly useful for hand-traced tests and exact enumeration.
    """

    def __init__(self, rows, n_slots: int):
        self.n_slots = int(n_slots)
        self._rows = [np.atleast_1d(np.asarray(r, dtype=float)) for r in rows]

    def __call__(self, t: int) -> np.ndarray:
        out = np.ones(self.n_slots)
        if 1 <= t <= len(self._rows):
            row = self._rows[t - 1]
            out[: len(row)] = row[: self.n_slots]
        return out
