"""Seeded random streams.

All randomness in the generator flows through :class:`Stream`, a thin layer
over numpy's PCG64 bit generator. Only the raw 64-bit outputs of the bit
generator are consumed; floats and bounded integers are derived here so the
sequence does not depend on numpy's distribution code, which is allowed to
change between releases.
"""
from __future__ import annotations

import hashlib
from typing import Sequence

import numpy as np

MASK64 = (1 << 64) - 1
ALGORITHM = "pcg64"

_GOLDEN = 0x9E3779B97F4A7C15


def splitmix64(x: int) -> int:
    x = (x + _GOLDEN) & MASK64
    x = ((x ^ (x >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    x = ((x ^ (x >> 27)) * 0x94D049BB133111EB) & MASK64
    return x ^ (x >> 31)


def derive_seed(seed: int, index: int, attempt: int = 0) -> int:
    """Per-example seed: ``seed ^ index`` on the first attempt.

    Retries mix the attempt number through splitmix64 so a failed slot gets
    an unrelated stream.
    """
    base = (seed ^ index) & MASK64
    if attempt == 0:
        return base
    return splitmix64(base ^ splitmix64(attempt))


def stable_hash(text: str) -> int:
    digest = hashlib.sha256(text.encode("utf-8")).digest()
    return int.from_bytes(digest[:8], "big")


class Stream:
    """Counted random stream over PCG64."""

    def __init__(self, seed: int):
        self.seed = int(seed) & MASK64
        self._bits = np.random.PCG64(self.seed)
        self.draws = 0

    def __repr__(self) -> str:
        return f"Stream(seed={self.seed}, draws={self.draws})"

    def raw(self) -> int:
        self.draws += 1
        return int(self._bits.random_raw())

    def raw_array(self, n: int) -> np.ndarray:
        if n <= 0:
            return np.zeros(0, dtype=np.uint64)
        self.draws += n
        return np.asarray(self._bits.random_raw(n), dtype=np.uint64)

    def random(self) -> float:
        """Float in [0, 1) with 53 random bits."""
        return (self.raw() >> 11) * 2.0**-53

    def random_array(self, n: int) -> np.ndarray:
        return (self.raw_array(n) >> np.uint64(11)).astype(np.float64) * 2.0**-53

    def uniform(self, low: float, high: float) -> float:
        return low + (high - low) * self.random()

    def uniform_array(self, low: float, high: float, n: int) -> np.ndarray:
        return low + (high - low) * self.random_array(n)

    def integers(self, low: int, high: int) -> int:
        """Integer in the closed interval [low, high], unbiased."""
        if high < low:
            raise ValueError(f"empty integer range [{low}, {high}]")
        span = high - low + 1
        if span > MASK64:
            raise ValueError("integer range too wide")
        limit = ((MASK64 + 1) // span) * span
        while True:
            r = self.raw()
            if r < limit:
                return low + r % span

    def choice_index(self, weights: Sequence[float]) -> int:
        total = float(sum(weights))
        if not total > 0:
            raise ValueError("choice weights must sum to a positive value")
        u = self.random() * total
        acc = 0.0
        for i, w in enumerate(weights):
            acc += w
            if u < acc:
                return i
        # u can only land here through rounding in the running sum
        return max(i for i, w in enumerate(weights) if w > 0)

    def permutation(self, n: int) -> list[int]:
        items = list(range(n))
        for i in range(n - 1, 0, -1):
            j = self.integers(0, i)
            items[i], items[j] = items[j], items[i]
        return items
