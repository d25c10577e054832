"""Subset of the NIST SP 800-22 randomness tests.

Implemented: frequency (monobit), block frequency, runs, longest run of
ones in a block, cumulative sums (both directions) and approximate
entropy. A sequence passes a test when its p-value is at least ``ALPHA``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.special import erfc, gammaincc, ndtr

ALPHA = 0.01


class InsufficientData(ValueError):
    def __init__(self, test: str, n: int, minimum: int):
        super().__init__(f"{test}: sequence has {n} bits, needs at least {minimum}")
        self.test = test
        self.minimum = minimum


@dataclass(frozen=True)
class TestResult:
    name: str
    p_value: float
    statistic: float
    error: Optional[str] = None

    @property
    def passed(self) -> bool:
        return self.error is None and self.p_value >= ALPHA


TestResult.__test__ = False  # keep pytest from collecting it


def as_bits(seq) -> np.ndarray:
    if isinstance(seq, str):
        return np.frombuffer(seq.encode(), dtype=np.uint8) - ord("0")
    return np.asarray(seq, dtype=np.uint8)


def bits_from_bytes(data: bytes) -> np.ndarray:
    """Packed bytes, bit 0 of byte 0 first."""
    return np.unpackbits(np.frombuffer(data, dtype=np.uint8), bitorder="little")


def bits_to_bytes(bits) -> bytes:
    return np.packbits(as_bits(bits), bitorder="little").tobytes()


def words_to_bits(words: np.ndarray) -> np.ndarray:
    """uint64 words to bits, word bit 0 first."""
    return bits_from_bytes(np.ascontiguousarray(words, dtype="<u8").tobytes())


def _need(name, n, minimum):
    if n < minimum:
        raise InsufficientData(name, n, minimum)


def _p(x) -> float:
    return float(min(1.0, max(0.0, x)))


def monobit(s) -> TestResult:
    bits = as_bits(s)
    n = len(bits)
    _need("monobit", n, 100)
    total = 2 * int(bits.sum()) - n
    s_obs = abs(total) / math.sqrt(n)
    return TestResult("monobit", _p(erfc(s_obs / math.sqrt(2))), s_obs)


def block_frequency(s, M: int = 128, check_length: bool = True) -> TestResult:
    bits = as_bits(s)
    n = len(bits)
    _need("block_frequency", n, 100 * M if check_length else M)
    N = n // M
    pi = bits[:N * M].reshape(N, M).mean(axis=1)
    chi2 = 4.0 * M * float(((pi - 0.5) ** 2).sum())
    return TestResult("block_frequency", _p(gammaincc(N / 2, chi2 / 2)), chi2)


def runs(s) -> TestResult:
    bits = as_bits(s)
    n = len(bits)
    _need("runs", n, 100)
    pi = bits.mean()
    if abs(pi - 0.5) >= 2 / math.sqrt(n):
        # frequency prerequisite fails; the runs test is not applicable
        return TestResult("runs", 0.0, float("nan"))
    v = 1 + int(np.count_nonzero(bits[1:] != bits[:-1]))
    num = abs(v - 2 * n * pi * (1 - pi))
    den = 2 * math.sqrt(2 * n) * pi * (1 - pi)
    return TestResult("runs", _p(erfc(num / den)), float(v))


# (min n, block size M, lowest class, probabilities per class)
_LONGEST_RUN = (
    (750000, 10000, 10, (0.0882, 0.2092, 0.2483, 0.1933, 0.1208, 0.0675, 0.0727)),
    (6272, 128, 4, (0.1174, 0.2430, 0.2493, 0.1752, 0.1027, 0.1124)),
    # M = 8 class probabilities are exact: 55, 94, 59, 48 out of 256
    (128, 8, 1, (55 / 256, 94 / 256, 59 / 256, 48 / 256)),
)


def _longest_runs(blocks: np.ndarray) -> np.ndarray:
    N, M = blocks.shape
    best = np.zeros(N, dtype=np.int64)
    cur = np.zeros(N, dtype=np.int64)
    for j in range(M):
        col = blocks[:, j].astype(bool)
        cur = np.where(col, cur + 1, 0)
        np.maximum(best, cur, out=best)
    return best


def longest_run_of_ones(s) -> TestResult:
    bits = as_bits(s)
    n = len(bits)
    _need("longest_run_of_ones", n, 128)
    for min_n, M, lo, probs in _LONGEST_RUN:
        if n >= min_n:
            break
    K = len(probs) - 1
    N = n // M
    longest = _longest_runs(bits[:N * M].reshape(N, M))
    v = np.bincount(np.clip(longest, lo, lo + K) - lo, minlength=K + 1)
    expected = N * np.array(probs)
    chi2 = float(((v - expected) ** 2 / expected).sum())
    return TestResult("longest_run_of_ones", _p(gammaincc(K / 2, chi2 / 2)), chi2)


def _tdiv(a: int, b: int) -> int:
    q = abs(a) // abs(b)
    return q if (a >= 0) == (b > 0) else -q


def cumulative_sums(s, forward: bool = True) -> TestResult:
    bits = as_bits(s)
    n = len(bits)
    name = "cumulative_sums_" + ("forward" if forward else "backward")
    _need(name, n, 100)
    x = 2 * bits.astype(np.int64) - 1
    if not forward:
        x = x[::-1]
    z = int(np.abs(np.cumsum(x)).max())
    sq = math.sqrt(n)
    nz = n // z
    k1 = np.arange(_tdiv(-nz + 1, 4), _tdiv(nz - 1, 4) + 1)
    k2 = np.arange(_tdiv(-nz - 3, 4), _tdiv(nz - 1, 4) + 1)
    t1 = (ndtr((4 * k1 + 1) * z / sq) - ndtr((4 * k1 - 1) * z / sq)).sum()
    t2 = (ndtr((4 * k2 + 3) * z / sq) - ndtr((4 * k2 + 1) * z / sq)).sum()
    return TestResult(name, _p(1.0 - t1 + t2), float(z))


def _phi(bits: np.ndarray, m: int) -> float:
    n = len(bits)
    if m == 0:
        return 0.0
    ext = np.concatenate([bits, bits[:m - 1]]).astype(np.int64)
    idx = np.zeros(n, dtype=np.int64)
    for j in range(m):
        idx = (idx << 1) | ext[j:j + n]
    c = np.bincount(idx, minlength=1 << m)
    c = c[c > 0] / n
    return float((c * np.log(c)).sum())


def approximate_entropy(s, m: int = 10, check_length: bool = True) -> TestResult:
    bits = as_bits(s)
    n = len(bits)
    _need("approximate_entropy", n, 1 << (m + 6) if check_length else m + 1)
    apen = _phi(bits, m) - _phi(bits, m + 1)
    chi2 = 2.0 * n * (math.log(2) - apen)
    return TestResult("approximate_entropy", _p(gammaincc(2 ** (m - 1), chi2 / 2)), chi2)


TESTS = (
    ("monobit", monobit),
    ("block_frequency", block_frequency),
    ("runs", runs),
    ("longest_run_of_ones", longest_run_of_ones),
    ("cumulative_sums_forward", lambda s: cumulative_sums(s, True)),
    ("cumulative_sums_backward", lambda s: cumulative_sums(s, False)),
    ("approximate_entropy", approximate_entropy),
)


def run_suite(s) -> list[TestResult]:
    bits = as_bits(s)
    out = []
    for name, fn in TESTS:
        try:
            out.append(fn(bits))
        except InsufficientData as e:
            out.append(TestResult(name, float("nan"), float("nan"), str(e)))
    return out


def format_results(results) -> str:
    lines = []
    for r in results:
        if r.error:
            lines.append(f"{r.name:26s} SKIP  {r.error}")
        else:
            lines.append(f"{r.name:26s} {'PASS' if r.passed else 'FAIL'}  p={r.p_value:.6f}")
    return "\n".join(lines) + "\n"
