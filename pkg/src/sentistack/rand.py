"""Deterministic randomness: FNV-1a hashing, splitmix64 streams, shuffling.

Every random decision in the package flows through a named SplitMix64
stream so that runs are reproducible across platforms and processes.
Streams are derived from a root seed plus a short tag, which keeps
unrelated components (fold shuffling, bootstrap resampling, member
seeding) statistically independent without any global state.
"""

from __future__ import annotations

from typing import Iterable

MASK64 = 0xFFFFFFFFFFFFFFFF

FNV_OFFSET = 0xCBF29CE484222325  # 14695981039346656037
FNV_PRIME = 0x100000001B3  # 1099511628211


def fnv1a_64(data: bytes) -> int:
    """64-bit FNV-1a hash of a byte string."""
    h = FNV_OFFSET
    for b in data:
        h ^= b
        h = (h * FNV_PRIME) & MASK64
    return h


def derive_seed(seed: int, tag: str) -> int:
    """Derive a named sub-seed: hash of the little-endian seed bytes plus the tag."""
    payload = (seed & MASK64).to_bytes(8, "little") + tag.encode("utf-8")
    return fnv1a_64(payload)


class SplitMix64:
    """The splitmix64 generator. Tiny state, good diffusion, trivially portable."""

    def __init__(self, seed: int):
        self.state = seed & MASK64

    def next_u64(self) -> int:
        self.state = (self.state + 0x9E3779B97F4A7C15) & MASK64
        z = self.state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
        return (z ^ (z >> 31)) & MASK64

    def next_below(self, n: int) -> int:
        """Draw from [0, n) by modulo reduction (bias is negligible for n << 2^64)."""
        if n <= 0:
            raise ValueError("n must be positive")
        return self.next_u64() % n

    def next_unit(self) -> float:
        """Uniform float in [0, 1) with 53 bits of precision."""
        return (self.next_u64() >> 11) * (2.0 ** -53)


def stream(seed: int, tag: str) -> SplitMix64:
    """Named stream rooted at seed."""
    return SplitMix64(derive_seed(seed, tag))


def fisher_yates(n: int, rng: SplitMix64) -> list[int]:
    """Deterministic permutation of range(n) using the classic backward sweep."""
    perm = list(range(n))
    for i in range(n - 1, 0, -1):
        j = rng.next_below(i + 1)
        perm[i], perm[j] = perm[j], perm[i]
    return perm


def shuffled(items: Iterable, rng: SplitMix64) -> list:
    """Copy of items in Fisher-Yates order."""
    seq = list(items)
    perm = fisher_yates(len(seq), rng)
    return [seq[i] for i in perm]
