"""Counter-based random substreams.

Every random draw in a run comes from a generator keyed by
``(master_seed, *path)``, so results do not depend on evaluation order or
on how work is split across workers.
"""
from __future__ import annotations

import zlib

import numpy as np

MAX_SEED = 2**64 - 1


def _key_word(part) -> int:
    if isinstance(part, (bool, np.bool_)):
        raise TypeError("substream keys must be ints or strings, not bool")
    if isinstance(part, (int, np.integer)):
        if part < 0:
            raise ValueError(f"substream key {part} must be non-negative")
        return int(part)
    if isinstance(part, str):
        # crc32 is stable across interpreter runs, unlike hash()
        return zlib.crc32(part.encode("utf-8"))
    raise TypeError(f"unsupported substream key {part!r}")


def check_seed(seed) -> int:
    seed = int(seed)
    if not 0 <= seed <= MAX_SEED:
        raise ValueError(f"seed must be a 64-bit unsigned integer, got {seed}")
    return seed


class StreamFactory:
    """Derive independent, reproducible generators from a master seed.

    Examples
    --------
    >>> streams = StreamFactory(7)
    >>> a = streams.stream("trial", 1, 0, 3).normal()
    >>> b = StreamFactory(7).child("trial", 1).stream(0, 3).normal()
    >>> a == b
    True
    """

    def __init__(self, master_seed: int, path: tuple = ()):
        self.master_seed = check_seed(master_seed)
        self.path = tuple(_key_word(p) for p in path)

    def child(self, *path) -> "StreamFactory":
        sub = StreamFactory(self.master_seed)
        sub.path = self.path + tuple(_key_word(p) for p in path)
        return sub

    def stream(self, *path) -> np.random.Generator:
        key = self.path + tuple(_key_word(p) for p in path)
        seq = np.random.SeedSequence(entropy=self.master_seed, spawn_key=key)
        return np.random.Generator(np.random.PCG64(seq))

    def __repr__(self):
        return f"StreamFactory({self.master_seed}, path={self.path})"
