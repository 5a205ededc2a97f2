"""splitmix64 pseudo-random stream.

Used wherever bit-exact, platform-independent draws matter: level
generation and benchmark seed derivation. Everything else (weight init,
action sampling, shuffles) goes through numpy Generators seeded from
values produced here.
"""
from __future__ import annotations

MASK64 = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15


def mix64(z: int) -> int:
    """The splitmix64 output permutation (a bijection on 64-bit ints)."""
    z &= MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return z ^ (z >> 31)


class SplitMix64:
    """Sequential splitmix64 generator over a 64-bit state."""

    __slots__ = ("_state",)

    def __init__(self, seed: int):
        self._state = seed & MASK64

    def next_u64(self) -> int:
        self._state = (self._state + _GOLDEN) & MASK64
        return mix64(self._state)

    def randrange(self, n: int) -> int:
        """Draw from [0, n). Modulo bias is negligible for the tiny n used here."""
        if n <= 0:
            raise ValueError("randrange needs n >= 1")
        return self.next_u64() % n


def stream_at(seed: int, slot: int) -> int:
    """Value at position `slot` of the splitmix64 stream seeded with `seed`.

    Counter-based form of SplitMix64(seed) advanced slot+1 times; distinct
    slots of the same seed always yield distinct values because mix64 is a
    bijection and the internal counters differ.
    """
    return mix64((seed + (slot + 1) * _GOLDEN) & MASK64)
