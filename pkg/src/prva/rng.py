"""Seedable uniform random streams.

Every stochastic operation in the package draws from a UniformStream: a
64-bit generator from the permuted-congruential family with an explicit
(seed, stream) identity. Two streams with different ids are statistically
independent, which is how parallel workers get their own randomness.
"""

from __future__ import annotations

import numpy as np

__all__ = ["UniformStream", "derive_seed"]

_U64 = np.uint64
_TWO64 = 2.0**64


def derive_seed(seed: int, *keys: int) -> int:
    """Derive a child seed from a master seed and a tuple of integer keys.

    Deterministic and collision-resistant; used to hand independent seeds
    to per-run / per-worker streams.
    """
    ss = np.random.SeedSequence([int(seed), *[int(k) for k in keys]])
    return int(ss.generate_state(1, dtype=np.uint64)[0])


class UniformStream:
    """A single-owner stream of 64-bit uniform integers (PCG64 underneath).

    The draw sequence is fully determined by ``(seed, stream)``. Instances
    are stateful cursors and must not be shared between concurrent
    consumers; spawn one stream per worker instead.
    """

    def __init__(self, seed: int, stream: int = 0):
        if seed < 0:
            raise ValueError("seed must be a non-negative integer")
        self.seed = int(seed)
        self.stream = int(stream)
        self._gen = np.random.Generator(
            np.random.PCG64(np.random.SeedSequence([self.seed, self.stream]))
        )

    def __repr__(self) -> str:
        return f"UniformStream(seed={self.seed}, stream={self.stream})"

    def next_u64(self, n: int | None = None):
        """Return one 64-bit unsigned integer, or an array of ``n`` of them."""
        if n is None:
            return int(self._gen.integers(0, 2**64, dtype=_U64))
        return self._gen.integers(0, 2**64, size=int(n), dtype=_U64)

    def uniform01(self, n: int | None = None):
        """Uniform floats in [0, 1) with 53-bit resolution."""
        if n is None:
            return float(self._gen.random())
        return self._gen.random(int(n))

    def spawn(self, key: int) -> "UniformStream":
        """A statistically independent stream derived from this one's identity."""
        return UniformStream(derive_seed(self.seed, self.stream, key))


_BELOW_ONE = np.nextafter(1.0, 0.0)


def u64_to_unit(u) -> np.ndarray:
    """Map 64-bit integers to [0, 1) by dividing by 2**64.

    u = 2**64 - 1 would round to exactly 1.0 in float64, so the top of the
    range is clamped to the largest double below 1.
    """
    return np.minimum(np.asarray(u, dtype=np.float64) / _TWO64, _BELOW_ONE)
