"""Self-synchronizing scrambler G(x) = 1 + x^39 + x^58 over block payloads.

``ScramblerState`` bit i is the line bit sent i + 1 bit times ago, so the
serial rule reads ``out = in ^ s[38] ^ s[57]``. The word-level code keeps
the same 58 bits in the opposite order (oldest bit at position 0), which
turns a whole 64-bit payload into a couple of shifts.
"""

from __future__ import annotations

import numpy as np

from . import _jit

MASK58 = (1 << 58) - 1
MASK64 = (1 << 64) - 1


def _reverse58(v: int) -> int:
    return int(f"{v & MASK58:058b}"[::-1], 2)


class ScramblerState(int):
    """58-bit history; bit i = bit sent i + 1 bit times ago."""

    def __new__(cls, raw: int = 0):
        return super().__new__(cls, raw & MASK58)


def scramble64(payload: int, state: int) -> tuple[int, ScramblerState]:
    r = _reverse58(state)
    a = payload ^ r ^ (r >> 19)
    out = (a ^ (a << 39) ^ (a << 58)) & MASK64
    return out, ScramblerState(_reverse58(out >> 6))


def descramble64(payload: int, state: int) -> tuple[int, ScramblerState]:
    r = _reverse58(state)
    out = (payload ^ r ^ (r >> 19) ^ (payload << 39) ^ (payload << 58)) & MASK64
    return out, ScramblerState(_reverse58(payload >> 6))


class _Stream:
    def __init__(self, state: int = 0):
        self._hist = np.uint64(_reverse58(state))

    @property
    def state(self) -> ScramblerState:
        return ScramblerState(_reverse58(int(self._hist)))


class Scrambler(_Stream):
    """Array scrambler carrying state across calls."""

    def __call__(self, payload: np.ndarray) -> np.ndarray:
        out, hist = _jit.scramble_words(payload, self._hist)
        self._hist = np.uint64(hist)
        return out


class Descrambler(_Stream):
    def __call__(self, payload: np.ndarray) -> np.ndarray:
        out, hist = _jit.descramble_words(payload, self._hist)
        self._hist = np.uint64(hist)
        return out
