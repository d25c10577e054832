"""Buffered array keystreams for the vectorised pipeline.

``take``/``peek`` hand out numpy arrays; the logical position only moves
on ``take`` or ``advance``, so a receiver can look ahead for a management
block and consume exactly up to it.
"""

from __future__ import annotations

import numpy as np

from . import _jit
from .chaos import GeneratorKey

_CHUNK = 1 << 15


def _state(key: GeneratorKey) -> np.ndarray:
    return np.array([key.x0, key.y0, key.gamma], dtype=np.uint64)


class _Buffered:
    def __init__(self):
        self._buf = self._produce(0)
        self._pos = 0
        self.position = 0

    def _produce(self, n):
        raise NotImplementedError

    def _ensure(self, n):
        avail = len(self._buf) - self._pos
        if avail < n:
            extra = self._produce(max(n - avail, _CHUNK))
            self._buf = np.concatenate([self._buf[self._pos:], extra])
            self._pos = 0

    def peek(self, n: int) -> np.ndarray:
        self._ensure(n)
        return self._buf[self._pos:self._pos + n]

    def advance(self, n: int) -> None:
        self._ensure(n)
        self._pos += n
        self.position += n

    def take(self, n: int) -> np.ndarray:
        out = self.peek(n).copy()
        self.advance(n)
        return out

    def skip(self, n: int) -> None:
        while n:
            k = min(n, 1 << 20)
            self.advance(k)
            n -= k


class BankStream(_Buffered):
    """64-bit data keystream from four keyed generators."""

    def __init__(self, keys):
        keys = list(keys)
        if len(keys) != 4:
            raise ValueError(f"bank needs 4 keys, got {len(keys)}")
        self._states = np.stack([_state(k) for k in keys])
        super().__init__()

    def _produce(self, n):
        return _jit.fill_bank(self._states, n)


class SyncStream(_Buffered):
    """1-bit header keystream."""

    def __init__(self, key: GeneratorKey):
        self._state_arr = _state(key)
        super().__init__()

    def _produce(self, n):
        return _jit.fill_bits(self._state_arr, n)


def words16(key: GeneratorKey, n: int) -> np.ndarray:
    """First n 16-bit outputs of one basic generator."""
    return (_jit.fill_raw(_state(key), n) & np.uint64(0xFFFF)).astype(np.uint16)
