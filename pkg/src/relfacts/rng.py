"""SplitMix64: a tiny counter-based 64-bit generator with a fixed, portable stream.

The stream depends only on the seed, so fact logs are reproducible across
platforms and numpy versions.
"""
from __future__ import annotations

from dataclasses import dataclass

MASK64 = (1 << 64) - 1
GAMMA = 0x9E3779B97F4A7C15


def mix64(z: int) -> int:
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return z ^ (z >> 31)


@dataclass(frozen=True)
class SplitMix64:
    """Immutable generator state; ``next()`` returns ``(value, advanced_generator)``."""

    state: int

    def __post_init__(self):
        object.__setattr__(self, "state", int(self.state) & MASK64)

    def next(self) -> tuple[int, "SplitMix64"]:
        s = (self.state + GAMMA) & MASK64
        return mix64(s), SplitMix64(s)

    def uniform(self) -> tuple[float, "SplitMix64"]:
        """A double in [0, 1) built from the top 53 bits."""
        x, gen = self.next()
        return (x >> 11) * (1.0 / (1 << 53)), gen


def derive_seeds(seed: int, count: int) -> list[int]:
    gen = SplitMix64(seed)
    out = []
    for _ in range(count):
        x, gen = gen.next()
        out.append(x)
    return out
