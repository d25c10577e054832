import dataclasses
import random

import numpy as np
import pytest

from physec.cipher import CipherKey
from physec.frames import ConfigError, FrameSpec
from physec.keys import format_key
from physec.linecode import SYNC_CTRL
from physec.nist import monobit, words_to_bits
from physec.sim import (
    LinkReport, SimConfig, configs_from_dict, parse_config_text, run_config_file,
    run_simulation,
)

K1 = CipherKey.random(random.Random(101))
K2 = CipherKey.random(random.Random(102))


def cfg(frames=50, util=0.5, length=256, key_rx=K1, **kw):
    return SimConfig(FrameSpec(length, frames, util, payload_seed=7), K1, key_rx, **kw)


def test_plain_link_delivers_everything():
    r = run_simulation(cfg())
    assert r.frames_received == r.frames_sent == 50
    assert r.crc_errors == r.frame_errors == 0
    assert r.frames_identical
    assert r.lock_acquired_at == 4224
    assert r.blocks_ciphered == 0


def test_encrypted_link_delivers_everything():
    r = run_simulation(cfg(schedule=[(100, "on")]))
    assert r.frames_received == 50 and r.crc_errors == 0 and r.frames_identical
    assert r.tx_keystream_positions == r.rx_keystream_positions == r.blocks_ciphered > 0


def test_zero_overhead():
    a = run_simulation(cfg())
    b = run_simulation(cfg(schedule=[(100, "on"), (2000, "off"), (3000, "on")]))
    assert a.blocks_sent == b.blocks_sent
    assert a.blocks_received == b.blocks_received


def test_mismatched_keys_deliver_nothing():
    r = run_simulation(cfg(key_rx=K2, schedule=[(100, "on")]))
    assert r.frames_received == 0
    assert r.frames_sent == 50


@pytest.mark.parametrize("c", [
    dict(schedule=[(100, "on"), (900, "off"), (1400, "on")]),
    dict(schedule=[(10, "on")], key_rx=K2),
    dict(schedule=[(100, "on")], leading_bits=37, error_positions=(9000, 20000, 20001, 45000)),
    dict(frames=0, schedule=[(3, "on")]),
])
def test_array_path_matches_reference(c):
    c = cfg(frames=c.pop("frames", 30), **c)
    assert run_simulation(c) == run_simulation(c, reference=True)


def test_single_payload_errors_are_contained():
    c0 = cfg(frames=200, util=0.5, length=512, schedule=[(100, "on")])
    total_bits = run_simulation(c0).blocks_sent * 66
    rng = np.random.default_rng(3)
    start, stop = 130 * 66, total_bits - 40 * 66
    errs = []
    while len(errs) < 20:
        pos = int(rng.integers(start, stop))
        if pos % 66 >= 2 and all(abs(pos - e) > 3 * 66 * 20 for e in errs):
            errs.append(pos)
    r = run_simulation(dataclasses.replace(c0, error_positions=tuple(errs)))
    assert r.invalid_headers == 0 and r.relocks == 0
    lost = r.frames_sent - r.frames_received
    assert lost == r.crc_errors + r.frame_errors
    assert lost <= 2 * len(errs)


def test_header_error_forces_relock():
    c0 = cfg(frames=100, schedule=[(100, "on")])
    pos = 500 * 66  # sync bit of block 500
    r = run_simulation(dataclasses.replace(c0, error_positions=(pos,)))
    assert r.invalid_headers == 1
    assert r.relocks == 1
    # blocks skipped while hunting were never deciphered, so the receiver's
    # keystream now lags by exactly that many steps
    dropped = r.blocks_sent - r.blocks_received - 64
    assert dropped >= 65
    assert r.tx_keystream_positions - r.rx_keystream_positions == dropped


def test_clean_link_conserves_blocks_after_lock():
    r = run_simulation(cfg(schedule=[(100, "on")]))
    assert r.blocks_received == r.blocks_sent - 64


def _header_stats(c):
    taps = []
    r = run_simulation(c, wire_tap=lambda s, cp, lp: taps.append((s.copy(), lp.copy())))
    return r, taps


def test_header_obfuscation_idle_vs_busy():
    idle = cfg(frames=0, tail_idle_blocks=100_000, schedule=[(10, "on")])
    busy = cfg(frames=400, util=0.98, length=1024, schedule=[(10, "on")])
    plain_idle = cfg(frames=0, tail_idle_blocks=100_000)
    plain_busy = cfg(frames=400, util=0.98, length=1024)
    r_idle, r_busy = run_simulation(idle), run_simulation(busy)
    assert abs(r_idle.ciphered_header_one_fraction - 0.5) < 0.01
    assert abs(r_busy.ciphered_header_one_fraction - 0.5) < 0.01
    # without the cipher the header ratio gives the load away
    assert run_simulation(plain_idle).header_one_fraction == 1.0
    assert run_simulation(plain_busy).header_one_fraction < 0.05


def test_wire_tap_sees_line_payload():
    c = cfg(frames=0, tail_idle_blocks=20_000, schedule=[(10, "on")])
    r, taps = _header_stats(c)
    sync = np.concatenate([t[0] for t in taps])
    line = np.concatenate([t[1] for t in taps])
    assert len(sync) == r.blocks_sent
    assert monobit(words_to_bits(line[20:])).passed
    assert np.isclose((sync == SYNC_CTRL).mean(), r.header_one_fraction)


def test_schedule_validation():
    with pytest.raises(ConfigError):
        cfg(schedule=[(10, "off")])
    with pytest.raises(ConfigError):
        cfg(schedule=[(10, "on"), (10, "off")])
    with pytest.raises(ConfigError):
        cfg(schedule=[(10, "on"), (20, "on")])
    with pytest.raises(ConfigError):
        run_simulation(cfg(frames=1, schedule=[(10**7, "on")]))


def test_report_text_round_trip():
    r = run_simulation(cfg(frames=3))
    text = r.to_text("forward.")
    assert "forward.frames_received = 3" in text
    back = LinkReport.from_text(text, "forward.")
    assert back.frames_received == 3 and back.frames_identical is True
    assert back.header_one_fraction == pytest.approx(r.header_one_fraction, abs=1e-6)


def _write_keys(tmp_path):
    (tmp_path / "a.key").write_text(format_key(K1))
    (tmp_path / "b.key").write_text(format_key(K2))


def test_config_parsing(tmp_path):
    _write_keys(tmp_path)
    d = parse_config_text(
        "frame_length = 128  # bytes\nframe_count = 5\nutilization = 0.25\n"
        "enable_at = 100\nerror_positions = 1, 2 3\ntx_key = a.key\nrx_key = a.key\n",
        tmp_path)
    assert d["error_positions"] == [1, 2, 3]
    assert d["tx_key"] == tmp_path / "a.key"
    (c,) = configs_from_dict(d)
    assert c.frames == FrameSpec(128, 5, 0.25, 0)
    assert c.schedule == [(100, "on")]
    for bad in ("bogus = 1\ntx_key=a\nrx_key=a", "frame_count = x\ntx_key=a\nrx_key=a",
                "frame_count 5", "tx_key = a.key"):
        with pytest.raises(ConfigError):
            parse_config_text(bad, tmp_path)


def test_duplex_config_file(tmp_path):
    _write_keys(tmp_path)
    path = tmp_path / "sim.cfg"
    path.write_text("frame_length = 128\nframe_count = 10\nenable_at = 100\n"
                    "tx_key = a.key\nrx_key = a.key\n"
                    "reverse_tx_key = b.key\nreverse_rx_key = a.key\n"
                    "report_out = out.txt\n")
    text = run_config_file(path)
    fwd = LinkReport.from_text(text, "forward.")
    rev = LinkReport.from_text(text, "reverse.")
    assert fwd.frames_received == 10
    assert rev.frames_received == 0
    assert (tmp_path / "out.txt").read_text() == text
    path.write_text("tx_key = a.key\nrx_key = a.key\nreverse_tx_key = b.key\n")
    with pytest.raises(ConfigError):
        run_config_file(path)
