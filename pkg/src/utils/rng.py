"""
Portable seeded random source.

xorshift64* (Vigna): state ^= state >> 12; state ^= state << 25;
state ^= state >> 27; output = state * 0x2545F4914F6CDD1D (mod 2**64).
Seeds are expanded with splitmix64 so that small or zero seeds give a
well-mixed non-zero state. Floats use the top 53 output bits.
"""

import hashlib
from typing import Sequence, TypeVar

MASK64 = (1 << 64) - 1
XORSHIFT_MULTIPLIER = 0x2545F4914F6CDD1D
SPLITMIX_INCREMENT = 0x9E3779B97F4A7C15
SPLITMIX_MUL_1 = 0xBF58476D1CE4E5B9
SPLITMIX_MUL_2 = 0x94D049BB133111EB

T = TypeVar("T")


def splitmix64(value: int) -> int:
    """One splitmix64 output for the given 64-bit input."""
    z = (value + SPLITMIX_INCREMENT) & MASK64
    z = ((z ^ (z >> 30)) * SPLITMIX_MUL_1) & MASK64
    z = ((z ^ (z >> 27)) * SPLITMIX_MUL_2) & MASK64
    return z ^ (z >> 31)


def _label_digest(label: object) -> int:
    digest = hashlib.blake2b(str(label).encode("utf-8"), digest_size=8).digest()
    return int.from_bytes(digest, "little")


def derive_seed(master_seed: int, *labels: object) -> int:
    """
    Derive a child seed from a master seed and a path of labels.

    Args:
        master_seed: Root seed of the experiment
        *labels: Level id, configuration name, spawn index, ...

    Returns:
        A 64-bit seed that depends on every label in order
    """
    state = splitmix64(master_seed & MASK64)
    for label in labels:
        state = splitmix64(state ^ _label_digest(label))
    return state


class XorShiftRandom:
    """xorshift64* generator with the handful of draws the simulator needs."""

    def __init__(self, seed: int):
        self.seed = seed
        self._state = splitmix64(seed & MASK64) or SPLITMIX_INCREMENT

    def next_u64(self) -> int:
        x = self._state
        x ^= x >> 12
        x ^= (x << 25) & MASK64
        x ^= x >> 27
        self._state = x
        return (x * XORSHIFT_MULTIPLIER) & MASK64

    def random(self) -> float:
        """Uniform float in [0, 1)."""
        return (self.next_u64() >> 11) * (1.0 / (1 << 53))

    def uniform(self, low: float, high: float) -> float:
        return low + (high - low) * self.random()

    def randbelow(self, n: int) -> int:
        """Uniform integer in [0, n) by rejection, free of modulo bias."""
        if n <= 0:
            raise ValueError("randbelow needs a positive bound")
        limit = (1 << 64) - ((1 << 64) % n)
        while True:
            value = self.next_u64()
            if value < limit:
                return value % n

    def choice(self, items: Sequence[T]) -> T:
        if not items:
            raise IndexError("cannot choose from an empty sequence")
        return items[self.randbelow(len(items))]
