"""Randomness subset over the data and header keystreams of random keys."""

import argparse
import random
from collections import Counter

from physec.cipher import CipherKey
from physec.keystream import BankStream, SyncStream
from physec.nist import TESTS, run_suite, words_to_bits


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--keys", type=int, default=10)
    ap.add_argument("--bits", type=int, default=10**6)
    ap.add_argument("--seed", type=int, default=0)
    a = ap.parse_args()

    rng = random.Random(a.seed)
    fails = Counter()
    for i in range(a.keys):
        key = CipherKey.random(rng)
        seqs = {"data": words_to_bits(BankStream(key.bank_keys).take(-(-a.bits // 64)))[:a.bits],
                "sync": SyncStream(key.sync_key).take(a.bits)}
        for kind, bits in seqs.items():
            res = run_suite(bits)
            ps = " ".join(f"{r.p_value:.3f}" for r in res)
            print(f"key {i:2d} {kind}: {ps}")
            for r in res:
                fails[(kind, r.name)] += not r.passed
    print("\nfailures per test:")
    for kind in ("data", "sync"):
        for name, _ in TESTS:
            print(f"  {kind:4s} {name:26s} {fails[(kind, name)]}/{a.keys}")


if __name__ == "__main__":
    main()
