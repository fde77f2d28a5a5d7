from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, strategies as st

from memaccel.trellis import (
    DVBT_CODE,
    CodeSpec,
    bits_to_dibits,
    dibits_to_bits,
    encode,
    encode_frames,
    parity,
    transition,
    with_tail,
)


def _window_dibit(g1: int, g2: int, w: int) -> int:
    # straight parity of the generator taps against the 7-bit window
    p1 = bin(w & g1).count("1") & 1
    p2 = bin(w & g2).count("1") & 1
    return (p1 << 1) | p2


def test_zero_state_zero_bit():
    assert transition(DVBT_CODE, 0, 0) == (0, 0b00)


def test_zero_state_one_bit():
    assert transition(DVBT_CODE, 0, 1) == (1, 0b11)


def test_state_63_bit_0():
    # window 0b1111110: 0o171 & w = 0b1111000, 0o133 & w = 0b1011010, both even
    assert transition(DVBT_CODE, 63, 0) == (62, 0b00)


def test_all_transitions_match_window_parity():
    for s in range(64):
        for b in (0, 1):
            w = (s << 1) | b
            assert transition(DVBT_CODE, s, b) == (w & 63, _window_dibit(0o171, 0o133, w))


def test_state_out_of_range():
    with pytest.raises(ValueError):
        transition(DVBT_CODE, 64, 0)


def test_invalid_generator_rejected():
    with pytest.raises(ValueError):
        CodeSpec(3, 0b110, 0b111)


def test_parity():
    assert [parity(x) for x in (0, 1, 3, 7, 0o171)] == [0, 1, 0, 1, 1]


def test_all_zero_input():
    dibits, final = encode(DVBT_CODE, [0] * 100)
    assert dibits == [0] * 100 and final == 0


def test_impulse_response():
    dibits, final = encode(DVBT_CODE, [1, 0, 0, 0, 0, 0, 0])
    assert dibits == [3, 1, 0, 3, 3, 2, 3]
    assert final == 0


def test_with_tail_terminates():
    bits = with_tail(DVBT_CODE, [1, 1, 0, 1])
    assert bits[-6:] == [0] * 6
    assert encode(DVBT_CODE, bits)[1] == 0


@given(st.lists(st.integers(0, 1), min_size=1, max_size=200))
def test_encoding_is_linear(bits):
    rng = np.random.default_rng(len(bits))
    other = rng.integers(0, 2, len(bits)).tolist()
    a, _ = encode(DVBT_CODE, bits)
    b, _ = encode(DVBT_CODE, other)
    c, _ = encode(DVBT_CODE, [x ^ y for x, y in zip(bits, other)])
    assert c == [x ^ y for x, y in zip(a, b)]


def test_encode_frames_matches_scalar():
    rng = np.random.default_rng(5)
    bits = rng.integers(0, 2, (7, 90), dtype=np.uint8)
    frames = encode_frames(DVBT_CODE, bits)
    for row, out in zip(bits, frames):
        assert out.tolist() == encode(DVBT_CODE, row.tolist())[0]


def test_dibit_bit_round_trip():
    d = np.array([[0, 1, 2, 3]], dtype=np.uint8)
    assert dibits_to_bits(d).tolist() == [[0, 0, 0, 1, 1, 0, 1, 1]]
    assert np.array_equal(bits_to_dibits(dibits_to_bits(d)), d)
