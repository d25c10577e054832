"""10GBASE-R 64b/66b block coding.

Characters use XGMII octet values (``/I/`` = 0x07, ``/S/`` = 0xFB, ...).
Inside control blocks they are carried as 7-bit codes (IDLE 0x00, ERROR
0x1E) or 4-bit O codes (Sequence 0x0), packed after the type byte in the
order given by each row of ``_ROWS``. Payload bit 0 is the first bit on the
wire and the type byte sits in payload bits [7:0].
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np

SYNC_DATA = 0b01
SYNC_CTRL = 0b10


class TxChar(NamedTuple):
    value: int
    is_control: bool = False


# XGMII control characters
IDLE = TxChar(0x07, True)
START = TxChar(0xFB, True)
TERMINATE = TxChar(0xFD, True)
ERROR = TxChar(0xFE, True)
SEQUENCE = TxChar(0x9C, True)

CharGroup8 = tuple  # of 8 TxChar


def D(v: int) -> TxChar:
    return TxChar(v & 0xFF, False)


_C_ENCODE = {IDLE.value: 0x00, ERROR.value: 0x1E}
_C_DECODE = {v: k for k, v in _C_ENCODE.items()}
_O_ENCODE = {SEQUENCE.value: 0x0}
_O_DECODE = {v: k for k, v in _O_ENCODE.items()}

_WIDTH = {"D": 8, "C": 7, "O": 4}

# type -> fields in payload bit order; S/T are implicit and absorb padding
_ROWS = {
    0x1E: "C0 C1 C2 C3 C4 C5 C6 C7",
    0x2D: "C0 C1 C2 C3 O4 D5 D6 D7",
    0x33: "C0 C1 C2 C3 S4 D5 D6 D7",
    0x66: "D1 D2 D3 O0 S4 D5 D6 D7",
    0x55: "D1 D2 D3 O0 O4 D5 D6 D7",
    0x78: "S0 D1 D2 D3 D4 D5 D6 D7",
    0x4B: "D1 D2 D3 O0 C4 C5 C6 C7",
    0x87: "T0 C1 C2 C3 C4 C5 C6 C7",
    0x99: "D0 T1 C2 C3 C4 C5 C6 C7",
    0xAA: "D0 D1 T2 C3 C4 C5 C6 C7",
    0xB4: "D0 D1 D2 T3 C4 C5 C6 C7",
    0xCC: "D0 D1 D2 D3 T4 C5 C6 C7",
    0xD2: "D0 D1 D2 D3 D4 T5 C6 C7",
    0xE1: "D0 D1 D2 D3 D4 D5 T6 C7",
    0xFF: "D0 D1 D2 D3 D4 D5 D6 T7",
}


def _layout(row: str):
    toks = [(t[0], int(t[1])) for t in row.split()]
    pad = 56 - sum(_WIDTH.get(k, 0) for k, _ in toks)
    fields, off = [], 8
    for kind, lane in toks:
        w = _WIDTH.get(kind, pad)
        fields.append((kind, lane, off, w))
        off += w
    pattern = "".join(k for k, _ in sorted(toks, key=lambda t: t[1]))
    return pattern, fields


_LAYOUT = {t: _layout(r) for t, r in _ROWS.items()}
_BY_PATTERN = {pat: t for t, (pat, _) in _LAYOUT.items()}


class BlockType(enum.Enum):
    DATA = "data"
    IDLE_CTRL = 0x1E
    CTRL_OS = 0x2D
    CTRL_START = 0x33
    OS_START = 0x66
    OS_OS = 0x55
    START = 0x78
    OS_CTRL = 0x4B
    TERM0 = 0x87
    TERM1 = 0x99
    TERM2 = 0xAA
    TERM3 = 0xB4
    TERM4 = 0xCC
    TERM5 = 0xD2
    TERM6 = 0xE1
    TERM7 = 0xFF
    UNKNOWN = "unknown"


@dataclass(frozen=True, slots=True)
class Block66:
    sync: int
    payload: int

    def payload_bytes(self) -> bytes:
        return self.payload.to_bytes(8, "little")


class CodingError(ValueError):
    pass


class EncodeError(CodingError):
    def __init__(self, msg, recovery: Block66):
        super().__init__(msg)
        self.recovery = recovery


class DecodeError(CodingError):
    def __init__(self, msg, kind: str):
        super().__init__(msg)
        self.kind = kind
        self.recovery = ERROR_GROUP


ERROR_GROUP = (ERROR,) * 8
IDLE_GROUP = (IDLE,) * 8

IDLE_PAYLOAD = 0x1E
ERROR_PAYLOAD = sum(0x1E << (8 + 7 * i) for i in range(8)) | 0x1E
CIPHER_ON_PAYLOAD = int.from_bytes(bytes([0x55, 0, 0, 0x04, 0, 0, 0, 0x04]), "little")
CIPHER_OFF_PAYLOAD = int.from_bytes(bytes([0x55, 0, 0, 0x05, 0, 0, 0, 0x05]), "little")


def _kind(c: TxChar) -> str:
    if not c.is_control:
        return "D"
    if c.value == START.value:
        return "S"
    if c.value == TERMINATE.value:
        return "T"
    if c.value in _O_ENCODE:
        return "O"
    if c.value in _C_ENCODE:
        return "C"
    return "?"


def encode_group(g: Sequence[TxChar]) -> Block66:
    if len(g) != 8:
        raise EncodeError(f"group has {len(g)} lanes", Block66(SYNC_CTRL, ERROR_PAYLOAD))
    pattern = "".join(_kind(c) for c in g)
    if pattern == "DDDDDDDD":
        return Block66(SYNC_DATA, int.from_bytes(bytes(c.value for c in g), "little"))
    btype = _BY_PATTERN.get(pattern)
    if btype is None:
        raise EncodeError(f"no block format for lane pattern {pattern}",
                          Block66(SYNC_CTRL, ERROR_PAYLOAD))
    payload = btype
    for kind, lane, off, _ in _LAYOUT[btype][1]:
        v = g[lane].value
        if kind == "D":
            payload |= v << off
        elif kind == "C":
            payload |= _C_ENCODE[v] << off
        elif kind == "O":
            payload |= _O_ENCODE[v] << off
    return Block66(SYNC_CTRL, payload)


def decode_block(b: Block66) -> tuple:
    if b.sync == SYNC_DATA:
        return tuple(TxChar(x, False) for x in b.payload.to_bytes(8, "little"))
    if b.sync != SYNC_CTRL:
        raise DecodeError(f"invalid sync header {b.sync:02b}", "header")
    btype = b.payload & 0xFF
    layout = _LAYOUT.get(btype)
    if layout is None:
        raise DecodeError(f"unknown block type {btype:#04x}", "type")
    out = [None] * 8
    for kind, lane, off, w in layout[1]:
        v = (b.payload >> off) & ((1 << w) - 1)
        if kind == "D":
            out[lane] = TxChar(v, False)
        elif kind == "C":
            if v not in _C_DECODE:
                raise DecodeError(f"invalid control code {v:#x} in lane {lane}", "code")
            out[lane] = TxChar(_C_DECODE[v], True)
        elif kind == "O":
            if v not in _O_DECODE:
                raise DecodeError(f"invalid O code {v:#x} in lane {lane}", "code")
            out[lane] = TxChar(_O_DECODE[v], True)
        elif kind == "S":
            out[lane] = START
        else:
            out[lane] = TERMINATE
    return tuple(out)


def make_idle_block() -> Block66:
    return Block66(SYNC_CTRL, IDLE_PAYLOAD)


def make_cipher_on_block() -> Block66:
    return Block66(SYNC_CTRL, CIPHER_ON_PAYLOAD)


def make_cipher_off_block() -> Block66:
    return Block66(SYNC_CTRL, CIPHER_OFF_PAYLOAD)


def classify(b: Block66) -> BlockType:
    if b.sync == SYNC_DATA:
        return BlockType.DATA
    if b.sync == SYNC_CTRL:
        try:
            return BlockType(b.payload & 0xFF)
        except ValueError:
            pass
    return BlockType.UNKNOWN


def is_all_idle(b: Block66) -> bool:
    return b.sync == SYNC_CTRL and b.payload == IDLE_PAYLOAD


def is_cipher_on(b: Block66) -> bool:
    return b.sync == SYNC_CTRL and b.payload == CIPHER_ON_PAYLOAD


def is_cipher_off(b: Block66) -> bool:
    return b.sync == SYNC_CTRL and b.payload == CIPHER_OFF_PAYLOAD


# -- 9-byte block records: header byte, then little-endian payload ----------

RECORD = np.dtype([("sync", "u1"), ("payload", "<u8")])


def pack_records(sync, payload) -> bytes:
    rec = np.empty(len(sync), dtype=RECORD)
    rec["sync"] = sync
    rec["payload"] = payload
    return rec.tobytes()


def unpack_records(data: bytes):
    if len(data) % RECORD.itemsize:
        raise CodingError(f"record stream length {len(data)} is not a multiple of 9")
    rec = np.frombuffer(data, dtype=RECORD)
    return rec["sync"].copy(), rec["payload"].copy()


def blocks_to_arrays(blocks: Sequence[Block66]):
    sync = np.fromiter((b.sync for b in blocks), dtype=np.uint8, count=len(blocks))
    payload = np.fromiter((b.payload for b in blocks), dtype=np.uint64, count=len(blocks))
    return sync, payload


def arrays_to_blocks(sync, payload) -> list[Block66]:
    return [Block66(int(s), int(p)) for s, p in zip(sync.tolist(), payload.tolist())]
