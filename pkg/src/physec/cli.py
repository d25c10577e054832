"""Command-line entry point.

File formats
  key file      5 lines ``gamma x0 y0`` (16 hex digits each); lines 1-4 are
                the payload generator lanes 0-3, line 5 the header generator.
  block file    9-byte records: byte 0 bits [1:0] = sync header (bit 0 is
                sent first), bytes 1-8 = payload, little-endian.
  bit file      packed bytes, bit 0 of byte 0 first.
  sim config    ``key = value`` lines, see ``physec simulate --help``.

Exit codes: 0 ok, 1 randomness test failed (nist), 2 bad input / I/O
error, 3 illegal sync header in a block file.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from .cipher import cipher_arrays
from .frames import ConfigError
from .keys import KeyFileError, load_key
from .keystream import BankStream, SyncStream
from .linecode import SYNC_CTRL, SYNC_DATA, CodingError, pack_records, unpack_records
from .nist import bits_from_bytes, bits_to_bytes, format_results, run_suite
from .sim import bench_throughput, run_config_file

SIM_HELP = """\
config keys (one per line, '#' comments):
  frame_length      bytes per MAC frame incl. FCS (>= 64)
  frame_count       number of frames
  utilization       target fraction of line rate, (0, 1]
  seed              payload seed
  tx_key, rx_key    key files for the forward direction (required)
  reverse_tx_key, reverse_rx_key   optional second direction
  enable_at         TX block indices where cipher-on is requested
  disable_at        TX block indices where cipher-off is requested
  error_positions   channel bit indices to flip
  leading_bits      junk bits sent before the first block
  lead_idle_blocks  idle blocks before the first frame (default 128)
  tail_idle_blocks  idle blocks after the last frame (default 16)
  report_out        also write the report to this file
"""


class CliError(Exception):
    def __init__(self, msg, code=2):
        super().__init__(msg)
        self.code = code


def _key(path):
    try:
        return load_key(path)
    except KeyFileError as e:
        raise CliError(f"{path}: {e}") from None


def cmd_keystream(a):
    key = _key(a.key)
    if a.which == "data":
        data = BankStream(key.bank_keys).take(a.blocks).astype("<u8").tobytes()
    else:
        data = bits_to_bytes(SyncStream(key.sync_key).take(a.blocks))
    Path(a.out).write_bytes(data)
    return 0


def cmd_cipher(a):
    key = _key(a.key)
    try:
        sync, payload = unpack_records(Path(a.inp).read_bytes())
    except CodingError as e:
        raise CliError(f"{a.inp}: {e}") from None
    bad = np.flatnonzero((sync != SYNC_DATA) & (sync != SYNC_CTRL))
    if len(bad):
        raise CliError(f"{a.inp}: record {int(bad[0])} has illegal sync header "
                       f"{int(sync[bad[0]]):02b}", code=3)
    bank, hdr = BankStream(key.bank_keys), SyncStream(key.sync_key)
    bank.skip(a.start_index)
    hdr.skip(a.start_index)
    n = len(sync)
    sync, payload = cipher_arrays(sync, payload, bank.take(n), hdr.take(n))
    Path(a.out).write_bytes(pack_records(sync, payload))
    return 0


def cmd_simulate(a):
    try:
        text = run_config_file(a.config, reference=a.reference)
    except (ConfigError, KeyFileError) as e:
        raise CliError(f"{a.config}: {e}") from None
    sys.stdout.write(text)
    return 0


def cmd_nist(a):
    bits = bits_from_bytes(Path(a.inp).read_bytes())
    if a.max_bits:
        bits = bits[:a.max_bits]
    results = run_suite(bits)
    sys.stdout.write(format_results(results))
    return 1 if any(r.error is None and not r.passed for r in results) else 0


def cmd_bench(a):
    rep = bench_throughput(_key(a.key), a.blocks, repeats=a.repeats)
    sys.stdout.write(rep.to_text())
    return 0


def _nonneg(s):
    v = int(s, 0)
    if v < 0:
        raise argparse.ArgumentTypeError("must be >= 0")
    return v


def build_parser():
    p = argparse.ArgumentParser(
        prog="physec", description="Chaotic 64b/66b physical-layer cipher tools.",
        epilog=__doc__.split("\n", 2)[2], formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = p.add_subparsers(dest="cmd", required=True)

    k = sub.add_parser("keystream", help="write raw keystream")
    k.add_argument("--key", required=True)
    k.add_argument("--blocks", type=_nonneg, required=True,
                   help="data: number of 64-bit words; sync: number of bits")
    k.add_argument("--out", required=True)
    k.add_argument("--which", choices=("data", "sync"), default="data",
                   help="data: little-endian uint64 words; sync: packed bits")
    k.set_defaults(fn=cmd_keystream)

    for name in ("encrypt", "decrypt"):
        c = sub.add_parser(name, help=f"{name} a block-record file")
        c.add_argument("--key", required=True)
        c.add_argument("--in", dest="inp", required=True)
        c.add_argument("--out", required=True)
        c.add_argument("--start-index", type=_nonneg, default=0,
                       help="keystream position of the first record")
        c.set_defaults(fn=cmd_cipher)

    s = sub.add_parser("simulate", help="run a loopback link simulation",
                       epilog=SIM_HELP, formatter_class=argparse.RawDescriptionHelpFormatter)
    s.add_argument("--config", required=True)
    s.add_argument("--reference", action="store_true",
                   help="use the per-block pure-Python pipeline")
    s.set_defaults(fn=cmd_simulate)

    n = sub.add_parser("nist", help="run the randomness test subset on a bit file")
    n.add_argument("--in", dest="inp", required=True)
    n.add_argument("--max-bits", type=_nonneg, default=0)
    n.set_defaults(fn=cmd_nist)

    b = sub.add_parser("bench", help="measure software cipher throughput")
    b.add_argument("--key", required=True)
    b.add_argument("--blocks", type=_nonneg, default=1 << 20)
    b.add_argument("--repeats", type=_nonneg, default=5)
    b.set_defaults(fn=cmd_bench)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except CliError as e:
        print(f"physec: {e}", file=sys.stderr)
        return e.code
    except OSError as e:
        print(f"physec: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
