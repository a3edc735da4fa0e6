"""Seedable randomness plumbing shared by the samplers and the benchmark harness.

Everything random in this package flows through a :class:`RandomSource`: a
64-bit seed plus a stream path. Two sources with the same (seed, stream) pair
produce identical draws on every run; sources with different stream paths are
statistically independent. Parallel code derives one child source per task, so
results never depend on worker count or scheduling order.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass

import numpy as np


def _key_to_int(key) -> int:
    """Map a stream key (non-negative int or str) to a stable integer."""
    if isinstance(key, (bool, float)):
        raise TypeError(f"stream keys must be ints or strings, got {key!r}")
    if isinstance(key, (int, np.integer)):
        if key < 0:
            raise ValueError(f"stream keys must be non-negative, got {key}")
        return int(key)
    if isinstance(key, str):
        digest = hashlib.blake2s(key.encode("utf-8"), digest_size=8).digest()
        return int.from_bytes(digest, "big")
    raise TypeError(f"stream keys must be ints or strings, got {key!r}")


@dataclass(frozen=True)
class RandomSource:
    """A deterministic handle on a PRNG: seed plus stream path.

    Parameters
    ----------
    seed : int
        Non-negative base seed.
    stream : tuple of int, optional
        Stream path; normally built through :meth:`child` rather than by hand.
    """

    seed: int
    stream: tuple = ()

    def __post_init__(self):
        if not isinstance(self.seed, (int, np.integer)) or isinstance(self.seed, bool):
            raise TypeError(f"seed must be an int, got {self.seed!r}")
        if self.seed < 0:
            raise ValueError(f"seed must be non-negative, got {self.seed}")
        object.__setattr__(self, "seed", int(self.seed))
        object.__setattr__(
            self, "stream", tuple(_key_to_int(k) for k in self.stream)
        )

    def child(self, *keys) -> "RandomSource":
        """Derive an independent source by appending keys to the stream path."""
        return RandomSource(self.seed, self.stream + keys)

    def generator(self) -> np.random.Generator:
        """Fresh generator for this (seed, stream); same draws every call."""
        ss = np.random.SeedSequence(entropy=self.seed, spawn_key=self.stream)
        return np.random.Generator(np.random.PCG64(ss))


def fresh_source() -> RandomSource:
    """A RandomSource seeded from OS entropy, for callers that opt out of reproducibility."""
    return RandomSource(int(np.random.SeedSequence().entropy) & (2**63 - 1))


class UniformBuffer:
    """Sequential uniform(0,1) draws, pulled from a Generator in blocks.

    Scalar Generator calls dominate the cost of tight sampling loops; this
    buffer amortizes them while keeping the draw sequence identical to
    consuming ``gen.random()`` block by block.
    """

    __slots__ = ("_gen", "_block", "_buf", "_pos")

    def __init__(self, gen: np.random.Generator, block: int = 8192):
        self._gen = gen
        self._block = block
        self._buf = ()
        self._pos = 0

    def next(self) -> float:
        pos = self._pos
        if pos >= len(self._buf):
            self._buf = self._gen.random(self._block).tolist()
            pos = 0
        self._pos = pos + 1
        return self._buf[pos]
