"""Memory-accelerated Viterbi decoder.

Add-compare-select for each four-state butterfly group is one ACS-table read;
the likeliest state and the normalization minimum come from a 16 -> 4 -> 1
tournament of min-select reads.  The normalizing subtraction and the
register-exchange update of the path bitsets stay computational.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import List, Sequence

import numpy as np

from memaccel.errors import SpecDigestMismatch
from memaccel.tables import MINSELECT_SPEC, LookupTable, acs_digest, acs_table_spec, minselect_digest
from memaccel.viterbi_ref import (
    METRIC_MAX,
    DecoderConfig,
    DecoderState,
    _flush_frames,
    flush_register,
)


def acs_lookups_per_step(num_states: int) -> int:
    return num_states // 4


def minselect_lookups_per_step(num_states: int) -> int:
    count, n = 0, num_states
    while n > 1:
        n = -(-n // 4)
        count += n
    return count


@dataclass
class MaDecoder:
    config: DecoderConfig
    acs: LookupTable
    minsel: LookupTable
    state: DecoderState = field(init=False)
    acs_lookups: int = field(default=0, init=False)
    minselect_lookups: int = field(default=0, init=False)

    def __post_init__(self):
        code = self.config.code
        if self.acs.digest != acs_digest(code) or self.acs.spec != acs_table_spec(code):
            raise SpecDigestMismatch("ACS table was built for a different code or quantization")
        if self.minsel.digest != minselect_digest() or self.minsel.spec != MINSELECT_SPEC:
            raise SpecDigestMismatch("min-select table was built for a different quantization")
        self.reset()

    def reset(self) -> None:
        self.state = DecoderState.initial(self.config)
        self._best = 0

    def reset_counters(self) -> None:
        self.acs_lookups = 0
        self.minselect_lookups = 0

    def likeliest(self, metrics: Sequence[int]):
        """Tournament of min-select lookups; returns ``(state, min_metric)``."""
        ms = self.minsel.scalar
        entries = [(i, m) for i, m in enumerate(metrics)]
        while len(entries) > 1:
            nxt = []
            for i in range(0, len(entries), 4):
                quad = entries[i:i + 4]
                while len(quad) < 4:
                    quad.append((-1, METRIC_MAX))
                v = ms[quad[0][1] | (quad[1][1] << 4) | (quad[2][1] << 8) | (quad[3][1] << 12)]
                nxt.append((quad[v >> 4][0], v & 15))
            self.minselect_lookups += len(nxt)
            entries = nxt
        return entries[0]

    def step(self, dibit: int) -> DecoderState:
        code = self.config.code
        ns = code.num_states
        half = ns // 2
        acs = self.acs.scalar
        metrics = self.state.metrics
        regs = self.state.path_registers
        new = [0] * ns
        surv = [0] * ns
        head = (dibit & 3) << 16
        for g in range(ns // 4):
            b = 2 * g
            v = acs[(g << 18) | head | metrics[b] | (metrics[b + half] << 4)
                    | (metrics[b + 1] << 8) | (metrics[b + 1 + half] << 12)]
            n = 4 * g
            new[n] = v & 15
            new[n + 1] = (v >> 4) & 15
            new[n + 2] = (v >> 8) & 15
            new[n + 3] = (v >> 12) & 15
            surv[n] = b + half if v & 0x10000 else b
            surv[n + 1] = b + half if v & 0x20000 else b
            surv[n + 2] = b + 1 + half if v & 0x40000 else b + 1
            surv[n + 3] = b + 1 + half if v & 0x80000 else b + 1
        self.acs_lookups += ns // 4
        best, low = self.likeliest(new)
        mask = (1 << self.config.traceback_depth) - 1
        self.state = DecoderState(
            tuple(m - low for m in new),
            tuple(((regs[s] << 1) | (n & 1)) & mask for n, s in enumerate(surv)),
            self.state.step_count + 1,
        )
        self._best = best
        return self.state


def decode_ma(decoder: MaDecoder, dibits: Sequence[int]) -> List[int]:
    """Decode a whole stream from a fresh state; output matches ``decode``."""
    decoder.reset()
    depth = decoder.config.traceback_depth
    out: List[int] = []
    for d in dibits:
        st = decoder.step(d)
        if st.step_count >= depth:
            out.append((st.path_registers[decoder._best] >> (depth - 1)) & 1)
    st = decoder.state
    out.extend(flush_register(st.path_registers[decoder._best], st.step_count, depth))
    return out


# --- frame-parallel engine -------------------------------------------------


def _tournament_frames(decoder: MaDecoder, metrics: np.ndarray):
    table = decoder.minsel.values
    frames = metrics.shape[0]
    idx = np.broadcast_to(np.arange(metrics.shape[1]), metrics.shape)
    vals = metrics
    while vals.shape[1] > 1:
        pad = -vals.shape[1] % 4
        if pad:
            vals = np.pad(vals, ((0, 0), (0, pad)), constant_values=METRIC_MAX)
            idx = np.pad(idx, ((0, 0), (0, pad)), constant_values=-1)
        q = vals.reshape(frames, -1, 4)
        v = table[q[..., 0] | (q[..., 1] << 4) | (q[..., 2] << 8) | (q[..., 3] << 12)]
        decoder.minselect_lookups += v.size
        local = (v >> 4).astype(np.int64)
        idx = np.take_along_axis(idx.reshape(frames, -1, 4), local[..., None], axis=2)[..., 0]
        vals = (v & 15).astype(np.int64)
    return idx[:, 0], vals[:, 0]


def decode_frames_ma(decoder: MaDecoder, dibits: np.ndarray) -> np.ndarray:
    """Frame-parallel counterpart of :func:`decode_ma` (depth <= 64)."""
    dibits = np.asarray(dibits, dtype=np.uint8)
    if dibits.ndim != 2:
        raise ValueError("expected a 2-D (frames, n) array")
    config = decoder.config
    depth = config.traceback_depth
    if depth > 64:
        raise ValueError("frame-parallel decoding supports traceback_depth <= 64")
    code = config.code
    ns = code.num_states
    half = ns // 2
    groups = ns // 4
    frames, n = dibits.shape
    table = decoder.acs.values

    g = np.arange(groups)
    f_idx = np.stack([2 * g, 2 * g + half, 2 * g + 1, 2 * g + 1 + half], axis=1)  # (groups, 4)
    group_head = (g << 18)[None, :]
    # survivors of new states 4g+i when decision is 0 / 1
    s0 = np.repeat(np.stack([2 * g, 2 * g + 1], axis=1), 2, axis=1).reshape(-1)
    s1 = s0 + half
    in_bit = np.arange(ns, dtype=np.uint64) & np.uint64(1)
    mask = np.uint64((1 << depth) - 1) if depth < 64 else np.uint64(0xFFFFFFFFFFFFFFFF)
    top = np.uint64(depth - 1)
    one = np.uint64(1)

    init = DecoderState.initial(config)
    metrics = np.tile(np.asarray(init.metrics, dtype=np.int64), (frames, 1))
    regs = np.zeros((frames, ns), dtype=np.uint64)
    out = np.empty((frames, n), dtype=np.uint8)
    rows = np.arange(frames)
    best = np.zeros(frames, dtype=np.int64)
    shifts4 = np.array([0, 4, 8, 12])
    for t in range(n):
        quad = metrics[:, f_idx]  # (frames, groups, 4)
        keys = group_head | (dibits[:, t, None].astype(np.int64) << 16) | (quad << shifts4).sum(axis=2)
        v = table[keys].astype(np.int64)  # (frames, groups)
        decoder.acs_lookups += v.size
        new = ((v[..., None] >> shifts4) & 15).reshape(frames, ns)
        dec = ((v[..., None] >> (16 + np.arange(4))) & 1).reshape(frames, ns).astype(bool)
        best, low = _tournament_frames(decoder, new)
        metrics = new - low[:, None]
        surv = np.where(dec, s1[None, :], s0[None, :])
        regs = ((np.take_along_axis(regs, surv, axis=1) << one) | in_bit[None, :]) & mask
        if t + 1 >= depth:
            out[:, t + 1 - depth] = (regs[rows, best] >> top) & one
    _flush_frames(out, regs[rows, best], n, depth)
    return out
