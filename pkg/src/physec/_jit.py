"""numba kernels backing the array paths.

Each kernel has a pure-Python counterpart elsewhere in the package; the
test suite checks them against each other. All integer math is kept in
``uint64`` explicitly, since numba promotes mixed signed/unsigned
arithmetic to float.
"""

import numpy as np
from numba import njit

U = np.uint64
M32 = U(0xFFFFFFFF)
M61 = U((1 << 61) - 1)
M64 = U(0xFFFFFFFFFFFFFFFF)
B32 = U(1 << 32)
S1 = U(1)
S6 = U(6)
S19 = U(19)
S32 = U(32)
S39 = U(39)
S44 = U(44)
S45 = U(45)
S58 = U(58)
S59 = U(59)
S60 = U(60)
ZERO = U(0)


@njit(cache=True, inline="always")
def _nlz(v):
    n = U(0)
    if v <= U(0x00000000FFFFFFFF):
        n += U(32)
        v = v << U(32)
    if v <= U(0x0000FFFFFFFFFFFF):
        n += U(16)
        v = v << U(16)
    if v <= U(0x00FFFFFFFFFFFFFF):
        n += U(8)
        v = v << U(8)
    if v <= U(0x0FFFFFFFFFFFFFFF):
        n += U(4)
        v = v << U(4)
    if v <= U(0x3FFFFFFFFFFFFFFF):
        n += U(2)
        v = v << U(2)
    if v <= U(0x7FFFFFFFFFFFFFFF):
        n += U(1)
    return n


@njit(cache=True, inline="always")
def div_hi(u1, v):
    """floor(u1 * 2**64 / v) for u1 < v (quotient fits in 64 bits)."""
    s = _nlz(v)
    v = v << s
    vn1 = v >> S32
    vn0 = v & M32
    un32 = u1 << s

    q1 = un32 // vn1
    rhat = un32 - q1 * vn1
    while q1 >= B32 or q1 * vn0 > (rhat << S32):
        q1 -= S1
        rhat += vn1
        if rhat >= B32:
            break
    un21 = (un32 << S32) - q1 * v

    q0 = un21 // vn1
    rhat = un21 - q0 * vn1
    while q0 >= B32 or q0 * vn0 > (rhat << S32):
        q0 -= S1
        rhat += vn1
        if rhat >= B32:
            break
    return (q1 << S32) + q0


@njit(cache=True, inline="always")
def stm_u64(x, g):
    if x < g:
        return div_hi(x, g)
    if x == g:
        return M64
    return div_hi(ZERO - x, ZERO - g)


@njit(cache=True)
def stm_many(xs, gs):
    out = np.empty(xs.shape[0], dtype=np.uint64)
    for i in range(xs.shape[0]):
        out[i] = stm_u64(xs[i], gs[i])
    return out


@njit(cache=True)
def fill_raw(state, n):
    """Advance one basic generator n steps; return the pre-perturbation x_i.

    ``state`` is a uint64[3] array (x~, lfsr, gamma), updated in place.
    """
    out = np.empty(n, dtype=np.uint64)
    x = state[0]
    s = state[1]
    g = state[2]
    for i in range(n):
        xi = stm_u64(x, g)
        fb = ((s >> S60) ^ (s >> S59) ^ (s >> S45) ^ (s >> S44)) & S1
        s = ((s << S1) | fb) & M61
        out[i] = xi
        x = xi ^ (s & U(0xFF))
    state[0] = x
    state[1] = s
    return out


@njit(cache=True)
def fill_bank(states, n):
    """64-bit words from four generators; ``states`` is uint64[4, 3]."""
    out = np.zeros(n, dtype=np.uint64)
    for lane in range(4):
        raw = fill_raw(states[lane], n)
        sh = U(16 * lane)
        for i in range(n):
            out[i] |= (raw[i] & U(0xFFFF)) << sh
    return out


@njit(cache=True)
def fill_bits(state, n):
    raw = fill_raw(state, n)
    out = np.empty(n, dtype=np.uint8)
    for i in range(n):
        out[i] = np.uint8(raw[i] & S1)
    return out


# Scrambler history word: bit j holds the bit sent 58 - j bit times ago.

@njit(cache=True)
def scramble_words(payload, hist):
    out = np.empty_like(payload)
    r = hist
    for i in range(payload.shape[0]):
        a = payload[i] ^ r ^ (r >> S19)
        o = a ^ (a << S39) ^ (a << S58)
        out[i] = o
        r = o >> S6
    return out, r


@njit(cache=True)
def descramble_words(payload, hist):
    out = np.empty_like(payload)
    r = hist
    for i in range(payload.shape[0]):
        p = payload[i]
        out[i] = p ^ r ^ (r >> S19) ^ (p << S39) ^ (p << S58)
        r = p >> S6
    return out, r


@njit(cache=True)
def serialize(sync, payload):
    n = sync.shape[0]
    bits = np.empty(n * 66, dtype=np.uint8)
    for i in range(n):
        base = i * 66
        h = sync[i]
        bits[base] = h & 1
        bits[base + 1] = (h >> 1) & 1
        p = payload[i]
        for j in range(64):
            bits[base + 2 + j] = np.uint8((p >> U(j)) & S1)
    return bits


LOCK_RUN = 64
# lock state layout (int64[6])
L_LOCKED, L_NEXT, L_INVALID, L_FIRST_LOCK, L_LOCKS, L_SLIPS = range(6)


@njit(cache=True)
def lock_scan(bits, base, st, counters, out_sync, out_payload):
    """Advance the block-lock machine over ``bits`` (absolute offset ``base``).

    Returns (number of blocks written, absolute index of the first bit
    still needed).
    """
    n = bits.shape[0]
    k = 0
    cap = out_sync.shape[0]
    while True:
        p = st[L_NEXT]
        rel = p - base
        if st[L_LOCKED] == 1:
            if rel + 66 > n or k >= cap:
                break
            h0 = bits[rel]
            h1 = bits[rel + 1]
            if h0 != h1:
                out_sync[k] = h0 | (h1 << 1)
                v = U(0)
                for j in range(64):
                    v |= U(bits[rel + 2 + j]) << U(j)
                out_payload[k] = v
                k += 1
                st[L_NEXT] = p + 66
            else:
                st[L_INVALID] += 1
                st[L_LOCKED] = 0
                st[L_SLIPS] += 1
                st[L_NEXT] = p + 1
                counters[:] = 0
        else:
            if rel + 2 > n:
                break
            c = p % 66
            if bits[rel] != bits[rel + 1]:
                counters[c] += 1
            else:
                counters[c] = 0
            if counters[c] == LOCK_RUN:
                st[L_LOCKED] = 1
                st[L_NEXT] = p + 66
                st[L_LOCKS] += 1
                if st[L_FIRST_LOCK] < 0:
                    st[L_FIRST_LOCK] = p + 66
                counters[:] = 0
            else:
                st[L_NEXT] = p + 1
    return k, st[L_NEXT]
