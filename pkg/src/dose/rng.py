"""Order-independent random streams keyed by (seed, generation, population, organism, purpose)."""

from __future__ import annotations

import hashlib
import json
import random


def derive_seed(seed: int, generation: int, population_index: int, organism_index: int,
                purpose: str) -> int:
    # JSON keeps the encoding unambiguous across field boundaries
    key = json.dumps([seed, generation, population_index, organism_index, purpose]).encode()
    return int.from_bytes(hashlib.blake2b(key, digest_size=16, person=b"dose-stream").digest(), "little")


def derive_stream(seed: int, generation: int, population_index: int, organism_index: int,
                  purpose: str) -> random.Random:
    """Independent stream for one consumer; -1 marks a population- or world-level index."""
    return random.Random(derive_seed(seed, generation, population_index, organism_index, purpose))


class LazyStream:
    """Defers seeding until the first draw; most hooks and genomes never draw."""

    __slots__ = ("_key", "_rng")

    def __init__(self, *key):
        self._key = key
        self._rng = None

    def __getattr__(self, name):
        if self._rng is None:
            self._rng = derive_stream(*self._key)
        return getattr(self._rng, name)
