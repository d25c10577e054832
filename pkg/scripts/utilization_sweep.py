"""Encrypted loopback runs over a sweep of link utilizations.

Prints one row per utilization: frames sent/received, CRC errors, wire
blocks and the fraction of control headers seen on the line, with and
without the cipher.
"""

import argparse
import random
import time

from physec.cipher import CipherKey
from physec.frames import FrameSpec
from physec.sim import SimConfig, run_simulation


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--frames", type=int, default=10_000)
    ap.add_argument("--length", type=int, default=1024)
    ap.add_argument("--util", type=float, nargs="+", default=[0.10, 0.25, 0.50, 0.75, 0.98])
    ap.add_argument("--seed", type=int, default=0)
    a = ap.parse_args()

    key = CipherKey.random(random.Random(a.seed))
    print(f"{'util':>5} {'sent':>7} {'recv':>7} {'crc':>4} {'blocks':>10} "
          f"{'hdr10 plain':>11} {'hdr10 enc':>9} {'secs':>6}")
    for u in a.util:
        spec = FrameSpec(a.length, a.frames, u, payload_seed=a.seed)
        t = time.perf_counter()
        enc = run_simulation(SimConfig(spec, key, key, [(100, "on")]))
        dt = time.perf_counter() - t
        plain = run_simulation(SimConfig(spec, key, key))
        print(f"{u:5.2f} {enc.frames_sent:7d} {enc.frames_received:7d} {enc.crc_errors:4d} "
              f"{enc.blocks_sent:10d} {plain.header_one_fraction:11.4f} "
              f"{enc.header_one_fraction:9.4f} {dt:6.1f}")


if __name__ == "__main__":
    main()
