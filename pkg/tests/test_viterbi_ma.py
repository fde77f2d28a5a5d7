from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from memaccel.channel import bsc_dibits
from memaccel.trellis import DVBT_CODE, encode, encode_frames
from memaccel.viterbi_ma import (
    MaDecoder,
    acs_lookups_per_step,
    decode_frames_ma,
    decode_ma,
    minselect_lookups_per_step,
)
from memaccel.viterbi_ref import DecoderConfig, DecoderState, acs_step, decode, decode_frames, select_likeliest


def test_analytic_lookup_counts():
    assert acs_lookups_per_step(64) == 16
    assert minselect_lookups_per_step(64) == 21
    assert minselect_lookups_per_step(4) == 1


def test_all_zero_stream(ma_decoder):
    assert decode_ma(ma_decoder, [0] * 300) == [0] * 300


def test_counters_match_analytic(ma_decoder):
    ma_decoder.reset_counters()
    decode_ma(ma_decoder, [1, 2, 3, 0] * 50)
    assert ma_decoder.acs_lookups == 16 * 200
    assert ma_decoder.minselect_lookups == 21 * 200


def test_step_matches_reference_step(ma_decoder, config):
    rng = np.random.default_rng(21)
    ref = DecoderState.initial(config)
    ma_decoder.reset()
    for d in rng.integers(0, 4, 300):
        ref = acs_step(ref, config, int(d))
        got = ma_decoder.step(int(d))
        assert got == ref


@settings(max_examples=300)
@given(st.lists(st.integers(0, 15), min_size=64, max_size=64))
def test_tournament_matches_linear_scan(config, acs_table, minsel_table, metrics):
    best, low = MaDecoder(config, acs_table, minsel_table).likeliest(metrics)
    assert best == select_likeliest(metrics) and low == min(metrics)


@pytest.mark.parametrize("p", [0.0, 0.01, 0.05, 0.1])
def test_scalar_decoders_agree(ma_decoder, config, p):
    rng = np.random.default_rng(22)
    x = rng.integers(0, 2, 1500).tolist()
    rx = bsc_dibits(encode(DVBT_CODE, x)[0], p, 7).tolist()
    assert decode_ma(ma_decoder, rx) == decode(config, rx)


@pytest.mark.parametrize("p", [0.0, 0.05, 0.12])
def test_frame_decoders_agree(ma_decoder, config, p):
    rng = np.random.default_rng(23)
    tx = rng.integers(0, 2, (20, 400), dtype=np.uint8)
    rx = bsc_dibits(encode_frames(DVBT_CODE, tx), p, 8)
    ma = decode_frames_ma(ma_decoder, rx)
    assert np.array_equal(ma, decode_frames(config, rx))
    assert ma[0].tolist() == decode_ma(ma_decoder, rx[0].tolist())


def test_short_depth(acs_table, minsel_table):
    cfg = DecoderConfig(DVBT_CODE, 35)
    dec = MaDecoder(cfg, acs_table, minsel_table)
    rx = np.random.default_rng(2).integers(0, 4, 200).tolist()
    assert decode_ma(dec, rx) == decode(cfg, rx)
