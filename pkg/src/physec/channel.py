"""Serial line model: block serializer, bit channel and 66-bit block lock.

A block goes on the wire as sync bit 0, sync bit 1, then payload bits 0..63.

Lock: while hunting, every bit position is examined as a candidate header
and each of the 66 offset classes keeps a count of consecutive legal
headers (``01``/``10``). The first class to reach 64 wins, and blocks are
emitted from the next header on. An illegal header while locked drops
lock; hunting restarts one bit further on with all counts cleared.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Iterator, Sequence

import numpy as np

from . import _jit
from .linecode import Block66

LOCK_RUN = _jit.LOCK_RUN


def serialize_blocks(blocks: Iterable[Block66]) -> list[int]:
    bits = []
    for b in blocks:
        bits.append(b.sync & 1)
        bits.append(b.sync >> 1 & 1)
        p = b.payload
        bits.extend((p >> j) & 1 for j in range(64))
    return bits


def serialize_arrays(sync: np.ndarray, payload: np.ndarray) -> np.ndarray:
    return _jit.serialize(sync, payload)


@dataclass
class ChannelModel:
    """Lossless FIFO bit pipe with deterministic bit flips.

    ``error_positions`` index the bits leaving the channel, counting any
    ``leading_bits`` of junk put in front of the stream.
    """

    error_positions: Sequence[int] = ()
    leading_bits: int = 0
    seed: int = 0
    sent: int = field(default=0, init=False)

    def __post_init__(self):
        self._errors = np.array(sorted(set(self.error_positions)), dtype=np.int64)
        if len(self._errors) and self._errors[0] < 0:
            raise ValueError("error positions must be non-negative")
        self._lead = np.random.default_rng(self.seed).integers(
            0, 2, self.leading_bits, dtype=np.uint8)

    def transmit(self, bits) -> np.ndarray:
        bits = np.asarray(bits, dtype=np.uint8)
        if len(self._lead):
            bits = np.concatenate([self._lead, bits])
            self._lead = self._lead[:0]
        lo, hi = self.sent, self.sent + len(bits)
        a, b = np.searchsorted(self._errors, [lo, hi])
        if b > a:
            bits = bits.copy()
            bits[self._errors[a:b] - lo] ^= 1
        self.sent = hi
        return bits


@dataclass
class LockStats:
    invalid_headers: int = 0
    lock_acquired_at: int = -1
    locks: int = 0
    slips: int = 0


class BlockLock:
    """Pure-Python block lock; ``push`` returns the blocks emitted so far."""

    def __init__(self):
        self.buf: list[int] = []
        self.base = 0
        self.next = 0
        self.locked = False
        self.counts = [0] * 66
        self.stats = LockStats()

    def push(self, bits: Iterable[int]) -> list[Block66]:
        self.buf.extend(int(b) for b in bits)
        out = []
        buf, base, counts = self.buf, self.base, self.counts
        n = len(buf)
        while True:
            rel = self.next - base
            if self.locked:
                if rel + 66 > n:
                    break
                h0, h1 = buf[rel], buf[rel + 1]
                if h0 != h1:
                    p = 0
                    for j in range(64):
                        p |= buf[rel + 2 + j] << j
                    out.append(Block66(h0 | h1 << 1, p))
                    self.next += 66
                else:
                    self.stats.invalid_headers += 1
                    self.stats.slips += 1
                    self.locked = False
                    self.next += 1
                    counts[:] = [0] * 66
            else:
                if rel + 2 > n:
                    break
                c = self.next % 66
                counts[c] = counts[c] + 1 if buf[rel] != buf[rel + 1] else 0
                if counts[c] == LOCK_RUN:
                    self.locked = True
                    self.next += 66
                    self.stats.locks += 1
                    if self.stats.lock_acquired_at < 0:
                        self.stats.lock_acquired_at = self.next
                    counts[:] = [0] * 66
                else:
                    self.next += 1
        # next may point past the buffered bits right after a lock
        drop = min(self.next - base, len(buf))
        del buf[:drop]
        self.base += drop
        return out


def block_lock(bitstream: Iterable[int]) -> Iterator[Block66]:
    lock = BlockLock()
    yield from lock.push(bitstream)


class ArrayBlockLock:
    """``BlockLock`` over uint8 bit arrays, backed by a numba kernel."""

    def __init__(self):
        self._buf = np.zeros(0, dtype=np.uint8)
        self._base = 0
        self._st = np.array([0, 0, 0, -1, 0, 0], dtype=np.int64)
        self._counts = np.zeros(66, dtype=np.int64)

    @property
    def stats(self) -> LockStats:
        st = self._st
        return LockStats(int(st[_jit.L_INVALID]), int(st[_jit.L_FIRST_LOCK]),
                         int(st[_jit.L_LOCKS]), int(st[_jit.L_SLIPS]))

    def push(self, bits: np.ndarray):
        buf = np.concatenate([self._buf, np.asarray(bits, dtype=np.uint8)])
        cap = len(buf) // 66 + 1
        sync = np.empty(cap, dtype=np.uint8)
        payload = np.empty(cap, dtype=np.uint64)
        k, need = _jit.lock_scan(buf, self._base, self._st, self._counts, sync, payload)
        drop = min(int(need) - self._base, len(buf))
        self._buf = buf[drop:]
        self._base += drop
        return sync[:k], payload[:k]
