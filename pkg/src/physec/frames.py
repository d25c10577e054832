"""Ethernet frame source and sink on the XGMII side of the PCS.

Frames are sent as ``/S/``, six preamble octets, SFD, the MAC frame
(14-byte header, seeded payload, FCS) and ``/T/``, always starting in
lane 0. Idle groups are added after each frame so that the running ratio
of frame octets (``/S/`` through the last FCS octet) to all octets tracks
the target utilization. The inter-frame gap, counted from ``/T/``, is at
least 12 octets.
"""

from __future__ import annotations

import hashlib
import math
import zlib
from dataclasses import dataclass, field
from typing import Iterator

import numpy as np

from .linecode import (
    D, IDLE, IDLE_GROUP, IDLE_PAYLOAD, START, SYNC_CTRL, SYNC_DATA, TERMINATE,
    Block66, DecodeError, decode_block, encode_group,
)

PREAMBLE = 0x55
SFD = 0xD5
MIN_IFG = 12
HEADER = bytes.fromhex("020000000002" "020000000001" "88b5")
# /S/ + 6 preamble octets + SFD, already in 0x78 block form
START_PAYLOAD = 0x78 | int.from_bytes(bytes([PREAMBLE] * 6 + [SFD]), "little") << 8


class ConfigError(ValueError):
    pass


def crc32(data: bytes) -> int:
    """Ethernet FCS (reflected 0x04C11DB7, init and final XOR all-ones)."""
    return zlib.crc32(data) & 0xFFFFFFFF


@dataclass(frozen=True)
class FrameSpec:
    frame_length: int = 1024
    frame_count: int = 1
    target_utilization: float = 0.5
    payload_seed: int = 0

    def __post_init__(self):
        if self.frame_length < 64:
            raise ConfigError(f"frame_length {self.frame_length} < 64")
        if self.frame_count < 0:
            raise ConfigError("frame_count must be non-negative")
        if not 0 < self.target_utilization <= 1:
            raise ConfigError(f"utilization {self.target_utilization} not in (0, 1]")
        if self.target_utilization > self.max_utilization:
            raise ConfigError(
                f"utilization {self.target_utilization} exceeds "
                f"{self.max_utilization:.4f} reachable with a {MIN_IFG}-octet IFG")

    @property
    def frame_octets(self) -> int:
        return self.frame_length + 8

    @property
    def max_utilization(self) -> float:
        return self.frame_octets / (self.frame_octets + MIN_IFG)


def _frames(spec: FrameSpec) -> Iterator[bytes]:
    rng = np.random.default_rng(spec.payload_seed)
    for _ in range(spec.frame_count):
        body = HEADER + rng.bytes(spec.frame_length - 18)
        yield body + crc32(body).to_bytes(4, "little")


def sent_frames(spec: FrameSpec) -> Iterator[bytes]:
    """MAC frames (with FCS) in transmit order."""
    return _frames(spec)


class _Pacer:
    """Number of trailing idle groups after each frame."""

    def __init__(self, spec: FrameSpec):
        self.per_frame = spec.frame_octets / spec.target_utilization
        self.groups = math.ceil((spec.frame_octets + 1) / 8)
        tail = 8 * self.groups - spec.frame_octets
        self.min_idle = max(0, math.ceil((MIN_IFG - tail) / 8))
        self.emitted = 0
        self.target = 0.0

    def next(self) -> int:
        self.target += self.per_frame
        self.emitted += 8 * self.groups
        k = max(self.min_idle, round((self.target - self.emitted) / 8))
        self.emitted += 8 * k
        return k


def generate_frames(spec: FrameSpec) -> Iterator[tuple]:
    """XGMII character groups (8 lanes) for the whole frame burst."""
    pacer = _Pacer(spec)
    for frame in _frames(spec):
        chars = [START] + [D(PREAMBLE)] * 6 + [D(SFD)] + [D(b) for b in frame]
        chars.append(TERMINATE)
        chars += [IDLE] * (-len(chars) % 8)
        for i in range(0, len(chars), 8):
            yield tuple(chars[i:i + 8])
        for _ in range(pacer.next()):
            yield IDLE_GROUP


def frame_block_chunks(spec: FrameSpec, chunk_frames: int = 256):
    """Encoded (sync, payload) arrays equal to ``encode_group`` over
    ``generate_frames(spec)``, produced ``chunk_frames`` frames at a time."""
    pacer = _Pacer(spec)
    nfull = spec.frame_length // 8
    parts_s, parts_p, k = [], [], 0
    for frame in _frames(spec):
        tail = [D(b) for b in frame[8 * nfull:]] + [TERMINATE]
        tail += [IDLE] * (8 - len(tail))
        tb = encode_group(tail)
        idle = pacer.next()
        n = 1 + nfull + 1 + idle
        s = np.full(n, SYNC_CTRL, dtype=np.uint8)
        p = np.full(n, IDLE_PAYLOAD, dtype=np.uint64)
        p[0] = START_PAYLOAD
        s[1:1 + nfull] = SYNC_DATA
        p[1:1 + nfull] = np.frombuffer(frame[:8 * nfull], dtype="<u8")
        s[1 + nfull], p[1 + nfull] = tb.sync, tb.payload
        parts_s.append(s)
        parts_p.append(p)
        k += 1
        if k == chunk_frames:
            yield np.concatenate(parts_s), np.concatenate(parts_p)
            parts_s, parts_p, k = [], [], 0
    if parts_s:
        yield np.concatenate(parts_s), np.concatenate(parts_p)


@dataclass
class RxCounters:
    frames_received: int = 0
    crc_errors: int = 0
    frame_errors: int = 0
    decode_errors: int = 0
    digest: "hashlib._Hash" = field(default_factory=hashlib.sha256)


class Deframer:
    """Receive-side MAC framing and FCS check.

    The preamble check is lenient: at least one 0x55 octet, then the SFD.
    Outside a frame, only ``/S/`` matters. Inside a frame data octets are
    collected until ``/T/``; any other control character (including the
    ``/E/`` substituted for undecodable blocks) aborts the frame.
    """

    def __init__(self):
        self.c = RxCounters()
        self.in_frame = False
        self.buf = bytearray()

    def _finish(self):
        buf = bytes(self.buf)
        i = 0
        while i < len(buf) and buf[i] == PREAMBLE:
            i += 1
        frame = buf[i + 1:]
        if i == 0 or i >= len(buf) or buf[i] != SFD or len(frame) < 64:
            self.c.frame_errors += 1
            return
        if crc32(frame[:-4]) != int.from_bytes(frame[-4:], "little"):
            self.c.crc_errors += 1
            return
        self.c.frames_received += 1
        self.c.digest.update(frame)

    def feed_group(self, group) -> None:
        for ch in group:
            if not self.in_frame:
                if ch == START:
                    self.in_frame = True
                    self.buf = bytearray()
                continue
            if not ch.is_control:
                self.buf.append(ch.value)
            elif ch == TERMINATE:
                self.in_frame = False
                self._finish()
            elif ch == START:
                self.c.frame_errors += 1
                self.buf = bytearray()
            else:
                self.in_frame = False
                self.c.frame_errors += 1

    def feed_block(self, b: Block66) -> None:
        try:
            group = decode_block(b)
        except DecodeError as e:
            self.c.decode_errors += 1
            group = e.recovery
        self.feed_group(group)

    def feed_arrays(self, sync: np.ndarray, payload: np.ndarray) -> None:
        """Equivalent to ``feed_block`` on every block, skipping runs that
        cannot change state."""
        n = len(sync)
        if n == 0:
            return
        data = sync == SYNC_DATA
        quiet = data | ((sync == SYNC_CTRL) & (payload == np.uint64(IDLE_PAYLOAD)))
        loud = np.flatnonzero(~quiet)
        ctrl = np.flatnonzero(~data)
        cur = 0
        while cur < n:
            if self.in_frame:
                j = np.searchsorted(ctrl, cur)
                i = int(ctrl[j]) if j < len(ctrl) else n
                if i > cur:
                    self.buf += payload[cur:i].astype("<u8").tobytes()
            else:
                j = np.searchsorted(loud, cur)
                i = int(loud[j]) if j < len(loud) else n
            if i >= n:
                break
            self.feed_block(Block66(int(sync[i]), int(payload[i])))
            cur = i + 1
