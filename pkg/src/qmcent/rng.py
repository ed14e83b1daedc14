"""Seeded random-number substreams.

Every stochastic component draws from its own named substream derived from
the single experiment seed, so components stay independently reproducible:
changing the number of Metropolis moves in one sampler does not disturb the
draws seen by another.
"""

from __future__ import annotations

import zlib

import numpy as np

# Canonical substream names used across the package.
STREAM_WALKER_INIT = "walker-init"
STREAM_METROPOLIS = "metropolis"
STREAM_EXACT_SAMPLER = "exact-sampler"


def substream(seed: int, name: str) -> np.random.Generator:
    """Return a generator for the named substream of the master seed."""
    tag = zlib.crc32(name.encode("utf-8"))
    ss = np.random.SeedSequence(entropy=int(seed) & 0xFFFFFFFFFFFFFFFF, spawn_key=(tag,))
    return np.random.Generator(np.random.PCG64(ss))
