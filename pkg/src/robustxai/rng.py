"""Counter-based random number plumbing.

Every stochastic operation in the toolkit takes an explicit RngSpec so that runs
are reproducible bit for bit: the pair (seed, stream_id) keys a Philox counter
generator, and derived streams are obtained by hashing child indices into the
stream id. Parallel workers must use distinct stream ids.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

_MASK64 = (1 << 64) - 1


def _splitmix64(z: int) -> int:
    z = (z + 0x9E3779B97F4A7C15) & _MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return (z ^ (z >> 31)) & _MASK64


@dataclass(frozen=True)
class RngSpec:
    """A fully deterministic random stream identified by (seed, stream_id)."""

    seed: int
    stream_id: int = 0

    def generator(self) -> np.random.Generator:
        key = np.array([self.seed & _MASK64, self.stream_id & _MASK64], dtype=np.uint64)
        return np.random.Generator(np.random.Philox(key=key))

    def child(self, *indices: int) -> "RngSpec":
        """Derive a sub-stream; distinct index tuples give distinct streams."""
        s = self.stream_id & _MASK64
        for i in indices:
            s = _splitmix64(s ^ _splitmix64(i & _MASK64))
        return RngSpec(self.seed, s)

    def child_from_bytes(self, payload: bytes) -> "RngSpec":
        """Derive a sub-stream keyed by content, independent of call order."""
        s = self.stream_id & _MASK64
        for off in range(0, len(payload), 8):
            word = int.from_bytes(payload[off:off + 8], "little")
            s = _splitmix64(s ^ word)
        return RngSpec(self.seed, s)


def as_generator(rng: "RngSpec | np.random.Generator") -> np.random.Generator:
    """Accept either an RngSpec or an already-built Generator."""
    if isinstance(rng, np.random.Generator):
        return rng
    if isinstance(rng, RngSpec):
        return rng.generator()
    raise TypeError(f"expected RngSpec or numpy Generator, got {type(rng)!r}")
