import numpy as np
import pytest
from hypothesis import given, strategies as st

from physec.linecode import (
    CIPHER_OFF_PAYLOAD, CIPHER_ON_PAYLOAD, ERROR, IDLE, IDLE_GROUP, SEQUENCE, START,
    SYNC_CTRL, SYNC_DATA, TERMINATE, Block66, BlockType, D, DecodeError, EncodeError,
    _ROWS, arrays_to_blocks, blocks_to_arrays, classify, decode_block, encode_group,
    is_all_idle, is_cipher_off, is_cipher_on, make_cipher_off_block, make_cipher_on_block,
    make_idle_block, pack_records, unpack_records,
)

octet = st.integers(0, 255)
ctrl = st.sampled_from([IDLE, ERROR])


def data_chars(n):
    return st.lists(octet.map(D), min_size=n, max_size=n)


def ctrl_chars(n):
    return st.lists(ctrl, min_size=n, max_size=n)


def ordered_set():
    return data_chars(3).map(lambda d: [SEQUENCE] + d)


# one strategy per row of the block format table
PATTERNS = {
    "data": data_chars(8),
    0x1E: ctrl_chars(8),
    0x2D: st.tuples(ctrl_chars(4), ordered_set()).map(lambda t: t[0] + t[1]),
    0x33: st.tuples(ctrl_chars(4), data_chars(3)).map(lambda t: t[0] + [START] + t[1]),
    0x66: st.tuples(ordered_set(), data_chars(3)).map(lambda t: t[0] + [START] + t[1]),
    0x55: st.tuples(ordered_set(), ordered_set()).map(lambda t: t[0] + t[1]),
    0x78: data_chars(7).map(lambda d: [START] + d),
    0x4B: st.tuples(ordered_set(), ctrl_chars(4)).map(lambda t: t[0] + t[1]),
}
for lane, t in enumerate((0x87, 0x99, 0xAA, 0xB4, 0xCC, 0xD2, 0xE1, 0xFF)):
    PATTERNS[t] = st.tuples(data_chars(lane), ctrl_chars(7 - lane)).map(
        lambda x: x[0] + [TERMINATE] + x[1])

any_group = st.one_of(*PATTERNS.values()).map(tuple)


def test_pattern_table_covers_every_row():
    assert set(PATTERNS) - {"data"} == set(_ROWS)
    assert len(_ROWS) == 15


def test_data_block_example():
    b = encode_group([D(i) for i in range(8)])
    assert b == Block66(SYNC_DATA, 0x0706050403020100)
    assert decode_block(b) == tuple(D(i) for i in range(8))


def test_idle_block_example():
    b = encode_group(IDLE_GROUP)
    assert b.sync == SYNC_CTRL
    assert b.payload_bytes() == bytes([0x1E, 0, 0, 0, 0, 0, 0, 0])
    assert b == make_idle_block()
    assert decode_block(b) == IDLE_GROUP


def test_start_lane0_example():
    d = [D(0x10 + i) for i in range(7)]
    b = encode_group([START] + d)
    assert b.sync == SYNC_CTRL
    assert b.payload & 0xFF == 0x78
    assert b.payload >> 8 == int.from_bytes(bytes(range(0x10, 0x17)), "little")


def test_clause49_field_offsets():
    # 0x33: four 7-bit C codes, 4 pad bits, then D5..D7 from bit 40
    b = encode_group([ERROR] * 4 + [START, D(0xA1), D(0xB2), D(0xC3)])
    assert b.payload & 0xFF == 0x33
    assert (b.payload >> 8) & 0x7F == 0x1E
    assert (b.payload >> 29) & 0x7F == 0x1E
    assert (b.payload >> 36) & 0xF == 0
    assert b.payload >> 40 == 0xC3B2A1
    # 0x87: 7 pad bits then C1..C7
    b = encode_group([TERMINATE] + [ERROR] * 7)
    assert (b.payload >> 8) & 0x7F == 0
    assert (b.payload >> 15) & 0x7F == 0x1E
    # 0xCC: D0..D3, 3 pad bits, C5 from bit 43
    b = encode_group([D(1), D(2), D(3), D(4), TERMINATE, ERROR, IDLE, IDLE])
    assert (b.payload >> 8) & 0xFFFFFFFF == 0x04030201
    assert (b.payload >> 40) & 0x7 == 0
    assert (b.payload >> 43) & 0x7F == 0x1E


@given(any_group)
def test_round_trip(g):
    b = encode_group(g)
    assert b.sync in (SYNC_DATA, SYNC_CTRL)
    assert decode_block(b) == g


@pytest.mark.parametrize("row", list(PATTERNS))
@given(data=st.data())
def test_each_row_classifies(row, data):
    g = tuple(data.draw(PATTERNS[row]))
    b = encode_group(g)
    expect = BlockType.DATA if row == "data" else BlockType(row)
    assert classify(b) is expect


def test_type_values_distinct():
    vals = [t.value for t in BlockType if isinstance(t.value, int)]
    assert len(vals) == len(set(vals)) == 15


@pytest.mark.parametrize("group", [
    [D(0)] * 3 + [IDLE] + [D(0)] * 4,
    [D(0), D(0), START] + [D(0)] * 5,
    [IDLE, START] + [D(0)] * 6,
    [TERMINATE, D(1)] + [IDLE] * 6,
    [D(0)] * 7,
])
def test_unencodable_pattern(group):
    with pytest.raises(EncodeError) as e:
        encode_group(group)
    assert e.value.recovery.sync == SYNC_CTRL
    assert decode_block(e.value.recovery) == (ERROR,) * 8


@given(st.sampled_from([0b00, 0b11]), st.integers(0, 2**64 - 1))
def test_decode_rejects_bad_header(sync, payload):
    with pytest.raises(DecodeError) as e:
        decode_block(Block66(sync, payload))
    assert e.value.kind == "header"
    assert e.value.recovery == (ERROR,) * 8


def test_decode_unknown_type():
    with pytest.raises(DecodeError) as e:
        decode_block(Block66(SYNC_CTRL, 0x00))
    assert e.value.kind == "type"
    assert classify(Block66(SYNC_CTRL, 0x00)) is BlockType.UNKNOWN


def test_decode_bad_control_code():
    with pytest.raises(DecodeError):
        decode_block(Block66(SYNC_CTRL, 0x1E | (0x55 << 8)))


def test_cipher_on_off_bytes():
    on, off = make_cipher_on_block(), make_cipher_off_block()
    assert on.payload_bytes() == bytes([0x55, 0, 0, 4, 0, 0, 0, 4])
    assert off.payload_bytes() == bytes([0x55, 0, 0, 5, 0, 0, 0, 5])
    assert on.payload == 0x04000000_04000055
    assert on.payload ^ off.payload == (0x01 << 24) | (0x01 << 56)
    assert classify(on) is BlockType.OS_OS
    # they decode as two ordered sets: /Q/ 00 00 04
    assert decode_block(on) == (SEQUENCE, D(0), D(0), D(4)) * 2


def test_predicates():
    idle, on, off = make_idle_block(), make_cipher_on_block(), make_cipher_off_block()
    assert is_all_idle(idle) and not is_cipher_on(idle)
    assert is_cipher_on(on) and not is_cipher_off(on) and not is_all_idle(on)
    assert is_cipher_off(off) and not is_cipher_on(off)
    mixed = Block66(SYNC_CTRL, int.from_bytes(bytes([0x55, 0, 0, 4, 0, 0, 0, 5]), "little"))
    assert not is_cipher_on(mixed) and not is_cipher_off(mixed)
    assert classify(Block66(SYNC_DATA, 0)) is BlockType.DATA
    # data block whose bytes look like a Cipher_ON payload is still data
    assert not is_cipher_on(Block66(SYNC_DATA, CIPHER_ON_PAYLOAD))


def test_reserved_ordered_set_decodes():
    b = Block66(SYNC_CTRL, int.from_bytes(bytes([0x55, 0, 0, 0x06, 0, 0, 0, 0x07]), "little"))
    assert decode_block(b) == (SEQUENCE, D(0), D(0), D(6), SEQUENCE, D(0), D(0), D(7))


def test_records_round_trip():
    rng = np.random.default_rng(0)
    sync = rng.integers(1, 3, 50).astype(np.uint8)
    payload = rng.integers(0, 2**64, 50, dtype=np.uint64)
    data = pack_records(sync, payload)
    assert len(data) == 9 * 50
    assert data[0] == sync[0]
    assert data[1:9] == int(payload[0]).to_bytes(8, "little")
    s2, p2 = unpack_records(data)
    assert np.array_equal(s2, sync) and np.array_equal(p2, payload)
    blocks = arrays_to_blocks(sync, payload)
    s3, p3 = blocks_to_arrays(blocks)
    assert np.array_equal(s3, sync) and np.array_equal(p3, payload)
