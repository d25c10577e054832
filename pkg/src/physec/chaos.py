"""Fixed-point skew tent map keystream generators.

All state is integer. A ``Fraction64`` is a raw 64-bit word read as
``raw / 2**64``; the map itself is evaluated with an exact 128-bit
intermediate, so every implementation of these rules produces the same
bit stream for the same key.

The per-step order of a basic generator is::

    x_i      = stm(x~_{i-1}, gamma)
    output   = x_i & 0xffff            # taken before perturbation
    lfsr     = lfsr_step(lfsr)
    x~_i     = x_i ^ (lfsr & 0xff)     # fed back into the map
"""

from __future__ import annotations

from dataclasses import dataclass

MASK64 = (1 << 64) - 1
MASK61 = (1 << 61) - 1
ONE = 1 << 64

# 0-indexed taps of x^61 + x^60 + x^46 + x^45 + 1
LFSR_TAPS = (60, 59, 45, 44)


class ChaosError(ValueError):
    """Invalid generator parameter or state."""


def stm_step(x: int, gamma: int) -> int:
    """One iteration of the skew tent map on 64-bit fractions.

    ``x <= gamma`` takes the rising branch ``x / gamma``; the only input
    whose exact result (1.0) does not fit is ``x == gamma``, which clamps
    to ``2**64 - 1``.
    """
    if gamma == 0:
        raise ChaosError("gamma must be nonzero")
    if x <= gamma:
        q = (x << 64) // gamma
        return q if q <= MASK64 else MASK64
    return ((ONE - x) << 64) // (ONE - gamma)


def lfsr_step(state: int) -> int:
    if state == 0:
        raise ChaosError("LFSR state must be nonzero")
    fb = ((state >> 60) ^ (state >> 59) ^ (state >> 45) ^ (state >> 44)) & 1
    return ((state << 1) | fb) & MASK61


@dataclass(frozen=True)
class GeneratorKey:
    """189-bit key of one basic generator: (gamma, x0, y0)."""

    gamma: int
    x0: int
    y0: int

    def __post_init__(self):
        if not 0 < self.gamma <= MASK64:
            raise ChaosError(f"gamma out of range: {self.gamma:#x}")
        if not 0 <= self.x0 <= MASK64:
            raise ChaosError(f"x0 out of range: {self.x0:#x}")
        if not 0 < self.y0 <= MASK61:
            raise ChaosError(f"y0 must be a nonzero 61-bit value: {self.y0:#x}")

    @classmethod
    def random(cls, rng) -> "GeneratorKey":
        """Draw a key from a ``random.Random``-like source."""
        gamma = rng.getrandbits(64) or 1
        y0 = rng.getrandbits(61) or 1
        return cls(gamma, rng.getrandbits(64), y0)

    def hexline(self) -> str:
        return f"{self.gamma:016x} {self.x0:016x} {self.y0:016x}"


class BasicGenerator:
    """STM cell perturbed by a 61-bit LFSR; 16-bit output per step."""

    __slots__ = ("x", "lfsr", "gamma", "steps")

    def __init__(self, key: GeneratorKey):
        self.x = key.x0
        self.lfsr = key.y0
        self.gamma = key.gamma
        self.steps = 0

    def _advance(self) -> int:
        x = stm_step(self.x, self.gamma)
        self.lfsr = lfsr_step(self.lfsr)
        self.x = x ^ (self.lfsr & 0xFF)
        self.steps += 1
        return x

    def next16(self) -> int:
        return self._advance() & 0xFFFF

    def next_bit(self) -> int:
        return self._advance() & 1

    def state(self) -> tuple[int, int, int]:
        return self.x, self.lfsr, self.gamma


class KeystreamBank64:
    """Four basic generators; lane k fills word bits [16k+15:16k]."""

    def __init__(self, keys):
        keys = list(keys)
        if len(keys) != 4:
            raise ChaosError(f"bank needs 4 keys, got {len(keys)}")
        self.gens = [BasicGenerator(k) for k in keys]

    def next64(self) -> int:
        g0, g1, g2, g3 = self.gens
        return (g0.next16() | g1.next16() << 16
                | g2.next16() << 32 | g3.next16() << 48)

    @property
    def steps(self) -> int:
        return self.gens[0].steps


class SyncGenerator:
    """Basic generator emitting only bit 0 of each map output."""

    def __init__(self, key: GeneratorKey):
        self.inner = BasicGenerator(key)

    def next_bit(self) -> int:
        return self.inner.next_bit()

    @property
    def steps(self) -> int:
        return self.inner.steps


def generator_next16(g: BasicGenerator) -> int:
    return g.next16()


def bank64_next(b: KeystreamBank64) -> int:
    return b.next64()


def sync_next(s: SyncGenerator) -> int:
    return s.next_bit()
