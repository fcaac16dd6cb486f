"""Seeded, splittable random number streams.

Every sampler in this package draws from a ``numpy.random.Generator``.
Chains, replications and quantile levels each own one stream; streams with
the same (seed, stream_id) replay bit-identically, and distinct stream_ids
are statistically independent (PCG64 seeded through SeedSequence spawn
keys).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class RngStream:
    """Address of a reproducible random stream."""

    seed: int
    stream_id: int = 0

    def generator(self) -> np.random.Generator:
        return make_generator(self.seed, self.stream_id)

    def child(self, stream_id: int) -> "RngStream":
        return RngStream(self.seed, stream_id)


def make_generator(seed: int, stream_id: int = 0) -> np.random.Generator:
    """PCG64 generator for (seed, stream_id); same pair, same sequence."""
    ss = np.random.SeedSequence(entropy=int(seed), spawn_key=(int(stream_id),))
    return np.random.Generator(np.random.PCG64(ss))


def as_generator(rng) -> np.random.Generator:
    """Accept an RngStream, a Generator (or anything with its interface),
    or an integer seed."""
    if isinstance(rng, np.random.Generator):
        return rng
    if isinstance(rng, RngStream):
        return rng.generator()
    if hasattr(rng, "standard_normal"):
        return rng
    return make_generator(int(rng))
