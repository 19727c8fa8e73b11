"""Seedable, splittable random streams.

Every stochastic operation takes an explicit ``numpy.random.Generator``.
Streams for (round, client, local step) are derived from the experiment
seed by hashing the key path into a ``SeedSequence`` spawn key, so a
client's randomness does not depend on which thread ran it or in what
order.
"""

import zlib

import numpy as np

_TAGS = {}


def _tag(name: str) -> int:
    if name not in _TAGS:
        _TAGS[name] = zlib.crc32(name.encode())
    return _TAGS[name]


def derive(seed: int, *key) -> np.random.Generator:
    """Independent generator for ``key`` under ``seed``.

    Key components may be non-negative ints or short strings (hashed).
    """
    spawn_key = tuple(_tag(k) if isinstance(k, str) else int(k) for k in key)
    ss = np.random.SeedSequence(entropy=int(seed) & (2**64 - 1), spawn_key=spawn_key)
    return np.random.Generator(np.random.PCG64(ss))


def as_generator(rng) -> np.random.Generator:
    if isinstance(rng, np.random.Generator):
        return rng
    return np.random.default_rng(rng)


def child_seed(rng: np.random.Generator) -> int:
    """Draw a 63-bit seed from ``rng`` for seeding a derived family of streams."""
    return int(rng.integers(0, 2**63 - 1))
