"""Deterministic seed derivation and per-trial, per-stream substreams.

Reproducibility contract: every trial of every experiment draws from
numpy PCG64 generators whose seeds come from a fixed SplitMix64 mixing
chain over (base_seed, procedure_index, sweep_index, trial_index), with
one further mix per stream index. Replays are bit-exact for the same
numpy generator algorithm (PCG64 + ziggurat), and each stream owns its
own substream, so the observation sequence a stream would produce does
not depend on how a sampling rule interleaves the streams.
"""

from __future__ import annotations

import numpy as np

__all__ = ["splitmix64", "mix64", "trial_key", "TrialRng"]

_MASK = (1 << 64) - 1


def splitmix64(z: int) -> int:
    """One output of the SplitMix64 sequence seeded at ``z`` (64-bit)."""
    z = (z + 0x9E3779B97F4A7C15) & _MASK
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK
    return (z ^ (z >> 31)) & _MASK


def mix64(*parts: int) -> int:
    """Fold integers into one 64-bit key: acc = splitmix64(acc XOR part)."""
    acc = 0x243F6A8885A308D3  # arbitrary nonzero start (pi fraction bits)
    for part in parts:
        acc = splitmix64(acc ^ (int(part) & _MASK))
    return acc


def trial_key(
    base_seed: int, procedure_index: int, sweep_index: int, trial_index: int
) -> int:
    """64-bit key identifying one Monte Carlo trial.

    With common random numbers, callers pass the same procedure_index
    (conventionally 0) for every procedure so trials share stream paths.
    """
    return mix64(base_seed, procedure_index, sweep_index, trial_index)


class TrialRng:
    """Randomness owned by a single trial, split into per-stream substreams.

    ``stream(i)`` returns the generator for 1-based stream index ``i``,
    created lazily and cached; repeated calls return the same object.
    """

    __slots__ = ("key", "_streams")

    def __init__(self, key: int) -> None:
        self.key = int(key) & _MASK
        self._streams: dict[int, np.random.Generator] = {}

    def stream(self, index: int) -> np.random.Generator:
        gen = self._streams.get(index)
        if gen is None:
            gen = np.random.Generator(np.random.PCG64(mix64(self.key, index)))
            self._streams[index] = gen
        return gen
