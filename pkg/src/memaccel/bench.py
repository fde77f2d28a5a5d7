"""Workloads, table verification and timing shared by the CLI and tests."""

from __future__ import annotations

import gc
import statistics
import time
from dataclasses import dataclass
from typing import Callable, List, Optional

import numpy as np

from memaccel.channel import bsc_dibits
from memaccel.tables import LookupTable, acs_oracle, minselect_oracle
from memaccel.trellis import CodeSpec, encode_frames
from memaccel.viterbi_ma import MaDecoder, decode_frames_ma, decode_ma
from memaccel.viterbi_ref import DecoderConfig, decode, decode_frames

DEFAULT_FRAME_BITS = 1000


@dataclass(frozen=True)
class RunConfig:
    seed: int = 2010
    info_bits: int = 1_000_000
    bsc_p: float = 0.01
    traceback_depth: int = 64
    table_dir: str = "tables"
    repetitions: int = 41

    def __post_init__(self):
        if not 0.0 <= self.bsc_p <= 1.0:
            raise ValueError("bsc_p must be in [0, 1]")
        if not 0 <= self.seed < 1 << 64:
            raise ValueError("seed must be a 64-bit unsigned integer")


def frame_workload(code: CodeSpec, info_bits: int, seed: int, frame_bits: int = DEFAULT_FRAME_BITS):
    """Random info bits cut into zero-terminated frames.

    Returns ``(tx, dibits)``: ``tx`` is ``(frames, frame_bits + K - 1)`` with
    the tail zeros included, ``dibits`` the encoded frames.
    """
    frames = -(-info_bits // frame_bits)
    rng = np.random.default_rng([seed, 0])
    tx = np.zeros((frames, frame_bits + code.constraint_length - 1), dtype=np.uint8)
    tx[:, :frame_bits] = rng.integers(0, 2, size=(frames, frame_bits), dtype=np.uint8)
    return tx, encode_frames(code, tx)


def channel_seed(seed: int, p: float) -> List[int]:
    return [seed, 1, int(round(p * 1_000_000))]


def verify_table(table: LookupTable, oracle: Callable[[int], int], limit: Optional[int] = None) -> List[int]:
    """Keys where the table disagrees with a scalar oracle (first ``limit``)."""
    view = table.scalar
    bad = []
    for k in range(table.spec.entry_count):
        if view[k] != oracle(k):
            bad.append(k)
            if limit is not None and len(bad) >= limit:
                break
    return bad


def verify_acs(table: LookupTable, code: CodeSpec, limit: Optional[int] = 10) -> List[int]:
    return verify_table(table, acs_oracle(code), limit)


def verify_minselect(table: LookupTable, limit: Optional[int] = 10) -> List[int]:
    return verify_table(table, minselect_oracle, limit)


def differential(decoder: MaDecoder, info_bits: int, p: float, seed: int) -> dict:
    """Decode the same noisy frames with both engines and compare."""
    config = decoder.config
    tx, dibits = frame_workload(config.code, info_bits, seed)
    rx = bsc_dibits(dibits, p, channel_seed(seed, p))
    ref = decode_frames(config, rx)
    ma = decode_frames_ma(decoder, rx)
    info = tx.shape[1] - (config.code.constraint_length - 1)
    errors = int(np.count_nonzero(ref[:, :info] != tx[:, :info]))
    return {
        "p": p,
        "info_bits": int(tx.shape[0] * info),
        "identical": bool(np.array_equal(ref, ma)),
        "mismatches": int(np.count_nonzero(ref != ma)),
        "ref_bit_errors": errors,
        "ber": errors / (tx.shape[0] * info),
    }


def _time_pair(fa, fb, reps: int):
    """Alternate the two workloads rep by rep so drift hits both alike."""
    fa(), fb()  # warm caches and lazily built views
    ta, tb = [], []
    enabled = gc.isenabled()
    gc.disable()
    try:
        for _ in range(reps):
            for fn, out in ((fa, ta), (fb, tb)):
                t0 = time.perf_counter()
                fn()
                out.append(time.perf_counter() - t0)
    finally:
        if enabled:
            gc.enable()
    return ta, tb


def bench_decoders(decoder: MaDecoder, n_bits: int, p: float, seed: int, reps: int) -> dict:
    """Wall-clock both single-stream decoders on one noisy stream.

    Repetitions alternate between the decoders, so short streams with many
    repetitions give the steadiest ratio on a shared host.

    The acceleration factor is the ratio of median run times, which is the
    cost ratio when both run unthrottled on the same workload.
    """
    config: DecoderConfig = decoder.config
    tx, dibits = frame_workload(config.code, n_bits, seed, frame_bits=n_bits)
    rx = bsc_dibits(dibits, p, channel_seed(seed, p))[0].tolist()
    results = {}
    t_ref, t_ma = _time_pair(
        lambda: results.__setitem__("ref", decode(config, rx)),
        lambda: results.__setitem__("ma", decode_ma(decoder, rx)),
        reps,
    )
    decoder.reset_counters()
    decode_ma(decoder, rx)
    steps = len(rx)
    m_ref, m_ma = statistics.median(t_ref), statistics.median(t_ma)
    return {
        "steps": len(rx),
        "reps": reps,
        "t_ref": t_ref,
        "t_ma": t_ma,
        "median_ref": m_ref,
        "median_ma": m_ma,
        "a": m_ref / m_ma,
        "identical": results["ref"] == results["ma"],
        "decoded": results["ma"],
        "acs_lookups_per_step": decoder.acs_lookups / steps,
        "minselect_lookups_per_step": decoder.minselect_lookups / steps,
    }
