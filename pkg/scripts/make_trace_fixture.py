"""Regenerate tests/data/generator_trace.json from the exact-rational oracle."""

import json
import random
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "tests"))
from oracles import generator_trace  # noqa: E402

N = 1000


def main():
    rng = random.Random(20181)
    gamma, x0, y0 = rng.getrandbits(64), rng.getrandbits(64), rng.getrandbits(61)
    trace = generator_trace(gamma, x0, y0, N)
    out = Path(__file__).resolve().parents[1] / "tests" / "data" / "generator_trace.json"
    out.write_text(json.dumps({"gamma": f"{gamma:016x}", "x0": f"{x0:016x}",
                               "y0": f"{y0:016x}", "outputs": trace}) + "\n")
    print(f"wrote {N} outputs to {out}")


if __name__ == "__main__":
    main()
