"""Deterministic seed derivation and per-rollout RNG streams.

Every stochastic component takes an explicit integer seed. Sub-seeds are
derived with SeedSequence so independent stages never share a stream, and
Monte Carlo rollouts use counter-addressed Philox streams so rollout i is
the same whether rollouts run sequentially or in parallel.
"""

from __future__ import annotations

import zlib

import numpy as np


def derive_seed(*parts: int | str) -> int:
    """Derive a 64-bit sub-seed from a tuple of ints and/or string tags."""
    entropy = [
        zlib.crc32(p.encode()) if isinstance(p, str) else int(p) for p in parts
    ]
    return int(np.random.SeedSequence(entropy).generate_state(1, np.uint64)[0])


def rollout_rng(base_seed: int, index: int) -> np.random.Generator:
    """Independent generator for rollout `index` of stream `base_seed`."""
    return np.random.Generator(
        np.random.Philox(key=base_seed, counter=[0, 0, 0, index])
    )


class RolloutStreams:
    """Fast sequential access to the rollout_rng(seed, i) family.

    Reuses a single Philox bit generator and repositions its counter, which
    is ~5x cheaper than constructing a fresh Generator per rollout while
    producing identical draws.
    """

    def __init__(self, base_seed: int):
        self._bg = np.random.Philox(key=base_seed)
        self._gen = np.random.Generator(self._bg)
        self._state = self._bg.state

    def at(self, index: int) -> np.random.Generator:
        st = self._state
        st["state"]["counter"][:] = (0, 0, 0, index)
        st["buffer_pos"] = st["buffer"].shape[0]  # discard buffered draws
        self._bg.state = st
        return self._gen
