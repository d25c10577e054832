"""Software throughput of keystream generation and of the cipher pipeline."""

import argparse
import random
import statistics

from physec.cipher import CipherKey
from physec.sim import bench_throughput


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--blocks", type=int, default=1 << 20)
    ap.add_argument("--runs", type=int, default=5)
    ap.add_argument("--repeats", type=int, default=5)
    a = ap.parse_args()

    key = CipherKey.random(random.Random(0))
    reps = [bench_throughput(key, a.blocks, a.repeats) for _ in range(a.runs)]
    for name in ("keystream", "pipeline"):
        v = [getattr(r, f"{name}_bits_per_s") / 1e6 for r in reps]
        spread = (max(v) - min(v)) / statistics.median(v)
        print(f"{name:9s} median {statistics.median(v):8.1f} Mb/s  spread {spread:.1%}")
    print(f"reference {reps[0].reference_blocks_per_s * 66 / 1e6:8.2f} Mb/s (per-block Python)")


if __name__ == "__main__":
    main()
