"""Loopback link simulation and throughput benchmark.

One direction of the link is::

    frames -> encode -> cipher TX -> scramble -> serialize -> channel
    channel -> block lock -> descramble -> cipher RX -> decode -> deframe

``run_simulation`` runs it on numpy block arrays; ``reference=True`` runs
the same configuration one block at a time through the pure-Python
objects. Both produce identical reports.
"""

from __future__ import annotations

import dataclasses
import hashlib
import itertools
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Optional

import numpy as np

from .channel import ArrayBlockLock, BlockLock, ChannelModel, serialize_arrays, serialize_blocks
from .cipher import CipherKey, Mode, SecDirectionArray, SecDirectionState, StateError, cipher_arrays
from .frames import ConfigError, Deframer, FrameSpec, frame_block_chunks, generate_frames, sent_frames
from .keys import load_key
from .keystream import BankStream, SyncStream
from .linecode import IDLE_PAYLOAD, SYNC_CTRL, Block66, encode_group, make_idle_block
from .scrambler import Descrambler, Scrambler, descramble64, scramble64

ON, OFF = "on", "off"


@dataclass
class LinkReport:
    frames_sent: int = 0
    frames_received: int = 0
    crc_errors: int = 0
    frame_errors: int = 0
    decode_errors: int = 0
    invalid_headers: int = 0
    blocks_sent: int = 0
    blocks_received: int = 0
    blocks_ciphered: int = 0
    header_one_fraction: float = 0.0
    ciphered_header_one_fraction: float = 0.0
    lock_acquired_at: int = -1
    relocks: int = 0
    tx_keystream_positions: int = 0
    rx_keystream_positions: int = 0
    frames_identical: bool = False

    def to_text(self, prefix: str = "") -> str:
        lines = []
        for f in dataclasses.fields(self):
            v = getattr(self, f.name)
            if isinstance(v, float):
                v = f"{v:.6f}"
            elif isinstance(v, bool):
                v = str(v).lower()
            lines.append(f"{prefix}{f.name} = {v}")
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str, prefix: str = "") -> "LinkReport":
        types = {f.name: f.type for f in dataclasses.fields(cls)}
        kw = {}
        for line in text.splitlines():
            if "=" not in line:
                continue
            k, v = (s.strip() for s in line.split("=", 1))
            if not k.startswith(prefix) or k[len(prefix):] not in types:
                continue
            k = k[len(prefix):]
            t = types[k]
            kw[k] = (v == "true") if t in (bool, "bool") else \
                float(v) if t in (float, "float") else int(v)
        return cls(**kw)


@dataclass
class SimConfig:
    frames: FrameSpec
    tx_key: CipherKey
    rx_key: CipherKey
    schedule: list = field(default_factory=list)
    error_positions: tuple = ()
    leading_bits: int = 0
    lead_idle_blocks: int = 128
    tail_idle_blocks: int = 16

    def __post_init__(self):
        self.schedule = sorted((int(i), str(w)) for i, w in self.schedule)
        want = ON
        last = -1
        for idx, what in self.schedule:
            if what != want:
                raise ConfigError(f"schedule must alternate on/off starting with on: {self.schedule}")
            if idx <= last or idx < 0:
                raise ConfigError(f"schedule indices must be increasing and non-negative: {self.schedule}")
            want, last = (OFF if what == ON else ON), idx
        if self.lead_idle_blocks < 0 or self.tail_idle_blocks < 0:
            raise ConfigError("idle block counts must be non-negative")

    def channel(self) -> ChannelModel:
        return ChannelModel(self.error_positions, self.leading_bits, seed=self.frames.payload_seed)


class _Scheduler:
    def __init__(self, schedule):
        self.events = list(schedule)
        self.i = 0

    def next_index(self) -> Optional[int]:
        return self.events[self.i][0] if self.i < len(self.events) else None

    def fire(self, state, index):
        while self.i < len(self.events) and self.events[self.i][0] == index:
            what = self.events[self.i][1]
            try:
                state.request_cipher_on() if what == ON else state.request_cipher_off()
            except StateError as e:
                raise ConfigError(f"schedule event {what!r} at block {index}: {e}") from None
            self.i += 1

    def check_done(self):
        if self.i < len(self.events):
            raise ConfigError(f"schedule events past end of stream: {self.events[self.i:]}")


def _sent_digest(spec: FrameSpec) -> str:
    h = hashlib.sha256()
    for f in sent_frames(spec):
        h.update(f)
    return h.hexdigest()


def _idle_arrays(n):
    return np.full(n, SYNC_CTRL, dtype=np.uint8), np.full(n, IDLE_PAYLOAD, dtype=np.uint64)


def _source_chunks(cfg: SimConfig, chunk_blocks: int = 1 << 16):
    spec = cfg.frames
    if cfg.lead_idle_blocks:
        for lo in range(0, cfg.lead_idle_blocks, chunk_blocks):
            yield _idle_arrays(min(chunk_blocks, cfg.lead_idle_blocks - lo))
    if spec.frame_count:
        per_frame = spec.frame_octets / spec.target_utilization / 8
        yield from frame_block_chunks(spec, max(1, int(chunk_blocks // per_frame)))
    for lo in range(0, cfg.tail_idle_blocks, chunk_blocks):
        yield _idle_arrays(min(chunk_blocks, cfg.tail_idle_blocks - lo))


def _source_blocks(cfg: SimConfig):
    idle = make_idle_block()
    yield from itertools.repeat(idle, cfg.lead_idle_blocks)
    for g in generate_frames(cfg.frames):
        yield encode_group(g)
    yield from itertools.repeat(idle, cfg.tail_idle_blocks)


def _finish(report: LinkReport, cfg, lock_stats, deframer, ones, ciph_ones, tx, rx):
    report.frames_sent = cfg.frames.frame_count
    c = deframer.c
    report.frames_received = c.frames_received
    report.crc_errors = c.crc_errors
    report.frame_errors = c.frame_errors
    report.decode_errors = c.decode_errors
    report.invalid_headers = lock_stats.invalid_headers
    report.lock_acquired_at = lock_stats.lock_acquired_at
    report.relocks = max(0, lock_stats.locks - 1)
    if report.blocks_sent:
        report.header_one_fraction = ones / report.blocks_sent
    if report.blocks_ciphered:
        report.ciphered_header_one_fraction = ciph_ones / report.blocks_ciphered
    report.tx_keystream_positions = tx.keystream_positions()
    report.rx_keystream_positions = rx.keystream_positions()
    report.frames_identical = c.digest.hexdigest() == _sent_digest(cfg.frames)
    return report


WireTap = Callable[[np.ndarray, np.ndarray, np.ndarray], None]


def run_simulation(cfg: SimConfig, reference: bool = False,
                   wire_tap: Optional[WireTap] = None) -> LinkReport:
    """Run one direction of the link.

    ``wire_tap(sync, cipher_payload, line_payload)`` sees every transmitted
    chunk: the header, the payload before scrambling and the payload on the
    line. Only the array path supports it.
    """
    if reference:
        if wire_tap is not None:
            raise ValueError("wire_tap needs the array path")
        return _run_reference(cfg)
    tx, rx = SecDirectionArray(cfg.tx_key), SecDirectionArray(cfg.rx_key)
    sched = _Scheduler(cfg.schedule)
    scr, dscr = Scrambler(), Descrambler()
    chan = cfg.channel()
    lock = ArrayBlockLock()
    deframer = Deframer()
    report = LinkReport()
    ones = ciph_ones = 0
    index = 0
    for sync, payload in _source_chunks(cfg):
        n = len(sync)
        mask = np.zeros(n, dtype=bool)
        lo = 0
        while lo < n:
            sched.fire(tx, index + lo)
            nxt = sched.next_index()
            hi = n if nxt is None or nxt >= index + n else nxt - index
            tx.tx_process(sync[lo:hi], payload[lo:hi], mask[lo:hi])
            lo = hi
        index += n
        report.blocks_sent += n
        hdr1 = sync == SYNC_CTRL
        ones += int(np.count_nonzero(hdr1))
        report.blocks_ciphered += int(np.count_nonzero(mask))
        ciph_ones += int(np.count_nonzero(hdr1 & mask))
        line = scr(payload)
        if wire_tap is not None:
            wire_tap(sync, payload, line)
        rs, rp = lock.push(chan.transmit(serialize_arrays(sync, line)))
        rp = dscr(rp)
        rx.rx_process(rs, rp)
        report.blocks_received += len(rs)
        deframer.feed_arrays(rs, rp)
    sched.check_done()
    return _finish(report, cfg, lock.stats, deframer, ones, ciph_ones, tx, rx)


def _run_reference(cfg: SimConfig) -> LinkReport:
    tx, rx = SecDirectionState(cfg.tx_key), SecDirectionState(cfg.rx_key)
    sched = _Scheduler(cfg.schedule)
    s_tx = s_rx = 0
    chan = cfg.channel()
    lock = BlockLock()
    deframer = Deframer()
    report = LinkReport()
    ones = ciph_ones = 0
    for index, b in enumerate(_source_blocks(cfg)):
        sched.fire(tx, index)
        before = tx.keystream_positions()
        c = tx.tx_process(b)
        ciphered = tx.keystream_positions() != before
        report.blocks_sent += 1
        report.blocks_ciphered += ciphered
        ones += c.sync == SYNC_CTRL
        ciph_ones += ciphered and c.sync == SYNC_CTRL
        line, s_tx = scramble64(c.payload, s_tx)
        bits = chan.transmit(serialize_blocks([Block66(c.sync, line)]))
        for rb in lock.push(bits.tolist()):
            clear, s_rx = descramble64(rb.payload, s_rx)
            report.blocks_received += 1
            deframer.feed_block(rx.rx_process(Block66(rb.sync, clear)))
    sched.check_done()
    return _finish(report, cfg, lock.stats, deframer, ones, ciph_ones, tx, rx)


# -- config files ------------------------------------------------------------

_INT_KEYS = {"frame_length", "frame_count", "seed", "leading_bits",
             "lead_idle_blocks", "tail_idle_blocks"}
_LIST_KEYS = {"enable_at", "disable_at", "error_positions"}
_PATH_KEYS = {"tx_key", "rx_key", "reverse_tx_key", "reverse_rx_key", "report_out"}
KNOWN_KEYS = _INT_KEYS | _LIST_KEYS | _PATH_KEYS | {"utilization"}


def parse_config_text(text: str, base_dir=".") -> dict:
    """Flat ``key = value`` lines; ``#`` starts a comment. Lists are
    comma- or space-separated; key paths resolve against ``base_dir``."""
    out = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected key = value")
        key, val = (s.strip() for s in line.split("=", 1))
        if key not in KNOWN_KEYS:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        try:
            if key in _INT_KEYS:
                out[key] = int(val, 0)
            elif key in _LIST_KEYS:
                out[key] = [int(t, 0) for t in val.replace(",", " ").split()]
            elif key == "utilization":
                out[key] = float(val)
            else:
                out[key] = Path(base_dir) / val
        except ValueError:
            raise ConfigError(f"line {lineno}: bad value for {key}: {val!r}") from None
    for req in ("tx_key", "rx_key"):
        if req not in out:
            raise ConfigError(f"missing required key {req!r}")
    return out


def configs_from_dict(d: dict) -> list[SimConfig]:
    """One SimConfig per simulated direction (forward, then reverse if keyed)."""
    schedule = [(i, ON) for i in d.get("enable_at", [])] + \
               [(i, OFF) for i in d.get("disable_at", [])]
    seed = d.get("seed", 0)

    def make(tx, rx, seed):
        spec = FrameSpec(d.get("frame_length", 1024), d.get("frame_count", 100),
                         d.get("utilization", 0.5), seed)
        return SimConfig(spec, load_key(tx), load_key(rx), schedule,
                         tuple(d.get("error_positions", ())), d.get("leading_bits", 0),
                         d.get("lead_idle_blocks", 128), d.get("tail_idle_blocks", 16))

    cfgs = [make(d["tx_key"], d["rx_key"], seed)]
    if "reverse_tx_key" in d or "reverse_rx_key" in d:
        if not ("reverse_tx_key" in d and "reverse_rx_key" in d):
            raise ConfigError("reverse direction needs both reverse_tx_key and reverse_rx_key")
        cfgs.append(make(d["reverse_tx_key"], d["reverse_rx_key"], seed + 1))
    return cfgs


def run_config_file(path, reference: bool = False) -> str:
    path = Path(path)
    d = parse_config_text(path.read_text(), path.parent)
    cfgs = configs_from_dict(d)
    if len(cfgs) == 1:
        text = run_simulation(cfgs[0], reference).to_text()
    else:
        text = "".join(run_simulation(c, reference).to_text(prefix)
                       for c, prefix in zip(cfgs, ("forward.", "reverse.")))
    if "report_out" in d:
        Path(d["report_out"]).write_text(text)
    return text


# -- benchmark ---------------------------------------------------------------

@dataclass
class BenchReport:
    blocks: int
    keystream_blocks_per_s: float
    pipeline_blocks_per_s: float
    reference_blocks_per_s: float

    @property
    def keystream_bits_per_s(self) -> float:
        return 66 * self.keystream_blocks_per_s

    @property
    def pipeline_bits_per_s(self) -> float:
        return 66 * self.pipeline_blocks_per_s

    def to_text(self) -> str:
        return (f"blocks = {self.blocks}\n"
                f"keystream_blocks_per_s = {self.keystream_blocks_per_s:.1f}\n"
                f"keystream_mbps = {self.keystream_bits_per_s / 1e6:.2f}\n"
                f"pipeline_blocks_per_s = {self.pipeline_blocks_per_s:.1f}\n"
                f"pipeline_mbps = {self.pipeline_bits_per_s / 1e6:.2f}\n"
                f"reference_blocks_per_s = {self.reference_blocks_per_s:.1f}\n")


def _best_time(fn, repeats):
    best = float("inf")
    for _ in range(repeats):
        t = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t)
    return best


def bench_throughput(key: CipherKey, block_count: int, repeats: int = 5,
                     reference_blocks: int = 2000) -> BenchReport:
    """Best-of-``repeats`` rates for keystream generation alone and for
    keystream plus block ciphering; the per-block reference path is timed
    on ``reference_blocks`` blocks for comparison."""
    rng = np.random.default_rng(0)
    sync = rng.integers(1, 3, block_count).astype(np.uint8)
    payload = rng.integers(0, 2**64, block_count, dtype=np.uint64)

    def keystream_only():
        BankStream(key.bank_keys).take(block_count)
        SyncStream(key.sync_key).take(block_count)

    def pipeline():
        st = SecDirectionArray(key)
        st.mode = Mode.CIPHERING
        st.tx_process(sync.copy(), payload.copy())

    def reference():
        st = SecDirectionState(key)
        st.mode = Mode.CIPHERING
        for s, p in zip(sync[:reference_blocks].tolist(), payload[:reference_blocks].tolist()):
            st.tx_process(Block66(s, p))

    pipeline()  # JIT warm-up
    t_ks = _best_time(keystream_only, repeats)
    t_pipe = _best_time(pipeline, repeats)
    t_ref = _best_time(reference, 1) if reference_blocks else float("nan")
    return BenchReport(block_count, block_count / t_ks, block_count / t_pipe,
                       reference_blocks / t_ref if reference_blocks else 0.0)
