"""Block stream cipher and the Cipher_ON / Cipher_OFF management machines.

TX pipeline order is encoder -> insert -> capture -> cipher -> scrambler.
The Cipher_ON block therefore travels in clear and ciphering starts on
the block after it; the Cipher_OFF block is the last ciphered block. The
RX side mirrors this: descrambler -> cipher -> capture/extract -> decoder.

Keystream generators advance exactly once per ciphered block and are
never rewound when ciphering stops; a later Cipher_ON continues the
stream.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .chaos import GeneratorKey, KeystreamBank64, SyncGenerator
from .keystream import BankStream, SyncStream
from .linecode import (
    CIPHER_OFF_PAYLOAD, CIPHER_ON_PAYLOAD, IDLE_PAYLOAD, SYNC_CTRL, SYNC_DATA,
    Block66, is_all_idle, is_cipher_off, is_cipher_on, make_cipher_off_block,
    make_cipher_on_block, make_idle_block,
)

MASK64 = (1 << 64) - 1


class HeaderError(ValueError):
    pass


class StateError(RuntimeError):
    pass


def header_map(sync: int) -> int:
    if sync == SYNC_DATA:
        return 0
    if sync == SYNC_CTRL:
        return 1
    raise HeaderError(f"illegal sync header {sync:02b}")


def header_unmap(bit: int) -> int:
    return SYNC_CTRL if bit & 1 else SYNC_DATA


def cipher_block(b: Block66, ks_data: int, ks_sync: int) -> Block66:
    """XOR the payload with the data keystream and the mapped header with
    the sync keystream bit. Its own inverse."""
    return Block66(header_unmap(header_map(b.sync) ^ (ks_sync & 1)),
                   b.payload ^ (ks_data & MASK64))


def cipher_arrays(sync: np.ndarray, payload: np.ndarray, ks_data: np.ndarray,
                  ks_sync: np.ndarray):
    bad = (sync != SYNC_DATA) & (sync != SYNC_CTRL)
    if bad.any():
        i = int(np.flatnonzero(bad)[0])
        raise HeaderError(f"illegal sync header {int(sync[i]):02b} at block {i}")
    return sync ^ (ks_sync * np.uint8(3)), payload ^ ks_data


@dataclass(frozen=True)
class CipherKey:
    """Four bank keys (lanes 0-3) plus the header keystream key; 945 bits."""

    bank_keys: tuple
    sync_key: GeneratorKey

    def __post_init__(self):
        if len(self.bank_keys) != 4:
            raise ValueError("CipherKey needs exactly four bank keys")

    @classmethod
    def random(cls, rng) -> "CipherKey":
        return cls(tuple(GeneratorKey.random(rng) for _ in range(4)),
                   GeneratorKey.random(rng))

    def generator_keys(self) -> list:
        return [*self.bank_keys, self.sync_key]


class Mode(enum.Enum):
    BYPASS = "bypass"
    ARMED_ON = "armed_on"
    CIPHERING = "ciphering"
    ARMED_OFF = "armed_off"


class _Machine:
    def __init__(self):
        self.mode = Mode.BYPASS
        self.pending_insert: Block66 | None = None

    def request_cipher_on(self):
        if self.mode is not Mode.BYPASS:
            raise StateError(f"cipher-on requested in mode {self.mode.name}")
        self.mode = Mode.ARMED_ON
        self.pending_insert = make_cipher_on_block()

    def request_cipher_off(self):
        if self.mode is not Mode.CIPHERING:
            raise StateError(f"cipher-off requested in mode {self.mode.name}")
        self.mode = Mode.ARMED_OFF
        self.pending_insert = make_cipher_off_block()


class SecDirectionState(_Machine):
    """Per-block reference implementation for one direction of a link."""

    def __init__(self, key: CipherKey):
        super().__init__()
        self.bank = KeystreamBank64(key.bank_keys)
        self.sync_gen = SyncGenerator(key.sync_key)

    def _cipher(self, b: Block66) -> Block66:
        header_map(b.sync)
        return cipher_block(b, self.bank.next64(), self.sync_gen.next_bit())

    def tx_process(self, b: Block66) -> Block66:
        mode = self.mode
        if mode is Mode.BYPASS:
            header_map(b.sync)
            return b
        if mode is Mode.ARMED_ON:
            if is_all_idle(b):
                out, self.pending_insert = self.pending_insert, None
                self.mode = Mode.CIPHERING
                return out
            header_map(b.sync)
            return b
        if mode is Mode.ARMED_OFF and is_all_idle(b):
            out = self._cipher(self.pending_insert)
            self.pending_insert = None
            self.mode = Mode.BYPASS
            return out
        return self._cipher(b)

    def rx_process(self, b: Block66) -> Block66:
        if self.mode is Mode.BYPASS:
            header_map(b.sync)
            if is_cipher_on(b):
                self.mode = Mode.CIPHERING
                return make_idle_block()
            return b
        out = self._cipher(b)
        if is_cipher_off(out):
            self.mode = Mode.BYPASS
            return make_idle_block()
        return out

    def keystream_positions(self) -> int:
        return self.bank.steps


def tx_process(st: SecDirectionState, b: Block66) -> Block66:
    return st.tx_process(b)


def rx_process(st: SecDirectionState, b: Block66) -> Block66:
    return st.rx_process(b)


def request_cipher_on(st) -> None:
    st.request_cipher_on()


def request_cipher_off(st) -> None:
    st.request_cipher_off()


def keystream_positions(st) -> int:
    return st.keystream_positions()


def _first(mask: np.ndarray, start: int) -> int:
    hits = np.flatnonzero(mask[start:])
    return start + int(hits[0]) if len(hits) else -1


class SecDirectionArray(_Machine):
    """Same machine as ``SecDirectionState`` over numpy block arrays.

    Arrays passed in are modified in place and also returned.
    """

    def __init__(self, key: CipherKey):
        super().__init__()
        self.bank = BankStream(key.bank_keys)
        self.sync_gen = SyncStream(key.sync_key)
        self._mask = None

    def keystream_positions(self) -> int:
        return self.bank.position

    def _cipher_range(self, sync, payload, lo, hi):
        n = hi - lo
        if n <= 0:
            return
        if self._mask is not None:
            self._mask[lo:hi] = True
        sync[lo:hi], payload[lo:hi] = cipher_arrays(
            sync[lo:hi], payload[lo:hi], self.bank.take(n), self.sync_gen.take(n))

    def tx_process(self, sync: np.ndarray, payload: np.ndarray, ciphered=None):
        """``ciphered``, if given, is a bool array set True where a block
        left the cipher encrypted."""
        self._mask = ciphered
        n = len(sync)
        idle = (sync == SYNC_CTRL) & (payload == np.uint64(IDLE_PAYLOAD))
        cur = 0
        while cur < n:
            mode = self.mode
            if mode is Mode.BYPASS:
                cipher_arrays(sync[cur:], payload[cur:], np.uint64(0), np.uint8(0))
                break
            if mode is Mode.CIPHERING:
                self._cipher_range(sync, payload, cur, n)
                break
            i = _first(idle, cur)
            if mode is Mode.ARMED_ON:
                if i < 0:
                    cipher_arrays(sync[cur:], payload[cur:], np.uint64(0), np.uint8(0))
                    break
                cipher_arrays(sync[cur:i], payload[cur:i], np.uint64(0), np.uint8(0))
                sync[i], payload[i] = SYNC_CTRL, CIPHER_ON_PAYLOAD
                self.mode, self.pending_insert = Mode.CIPHERING, None
                cur = i + 1
            else:
                if i < 0:
                    self._cipher_range(sync, payload, cur, n)
                    break
                self._cipher_range(sync, payload, cur, i)
                sync[i], payload[i] = SYNC_CTRL, CIPHER_OFF_PAYLOAD
                self._cipher_range(sync, payload, i, i + 1)
                self.mode, self.pending_insert = Mode.BYPASS, None
                cur = i + 1
        return sync, payload

    def rx_process(self, sync: np.ndarray, payload: np.ndarray):
        self._mask = None
        n = len(sync)
        cur = 0
        while cur < n:
            if self.mode is Mode.BYPASS:
                cipher_arrays(sync[cur:], payload[cur:], np.uint64(0), np.uint8(0))
                on = (sync[cur:] == SYNC_CTRL) & (payload[cur:] == np.uint64(CIPHER_ON_PAYLOAD))
                i = _first(on, 0)
                if i < 0:
                    break
                i += cur
                sync[i], payload[i] = SYNC_CTRL, IDLE_PAYLOAD
                self.mode = Mode.CIPHERING
                cur = i + 1
            else:
                m = n - cur
                s, p = cipher_arrays(sync[cur:], payload[cur:],
                                     self.bank.peek(m), self.sync_gen.peek(m))
                off = (s == SYNC_CTRL) & (p == np.uint64(CIPHER_OFF_PAYLOAD))
                i = _first(off, 0)
                if i < 0:
                    sync[cur:], payload[cur:] = s, p
                    self.bank.advance(m)
                    self.sync_gen.advance(m)
                    break
                sync[cur:cur + i], payload[cur:cur + i] = s[:i], p[:i]
                sync[cur + i], payload[cur + i] = SYNC_CTRL, IDLE_PAYLOAD
                self.bank.advance(i + 1)
                self.sync_gen.advance(i + 1)
                self.mode = Mode.BYPASS
                cur += i + 1
        return sync, payload
