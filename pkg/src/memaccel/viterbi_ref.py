"""Computation-only hard-decision Viterbi decoder with 4-bit metrics.

Path metrics are 4-bit saturating integers renormalized after every trellis
step so the global minimum is 0.  Survivors are kept by register exchange.
This decoder is the oracle every lookup table is filled from, and the
memory-accelerated decoder must reproduce its output bit for bit.

Decision delay: once ``t >= D`` steps are processed, each step emits the
oldest bit (bit ``D - 1``) of the likeliest state's register; at the end of
input the remaining bits of that register are flushed, so the output has
the same length as the input.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from typing import List, Sequence, Tuple

import numpy as np

from memaccel.trellis import DVBT_CODE, CodeSpec

METRIC_BITS = 4
METRIC_MAX = (1 << METRIC_BITS) - 1


@dataclass(frozen=True)
class DecoderConfig:
    code: CodeSpec = DVBT_CODE
    traceback_depth: int = 64
    # the only tie rule implemented; kept as a field so it lands in digests
    tie_break: str = field(default="lower-index", init=False)

    def __post_init__(self):
        if self.traceback_depth < 5 * self.code.constraint_length:
            raise ValueError(
                f"traceback_depth {self.traceback_depth} < 5 * K "
                f"({5 * self.code.constraint_length})"
            )


@dataclass(frozen=True)
class DecoderState:
    metrics: Tuple[int, ...]
    path_registers: Tuple[int, ...]
    step_count: int = 0

    @classmethod
    def initial(cls, config: DecoderConfig) -> "DecoderState":
        """Start in state 0; every other state begins saturated."""
        n = config.code.num_states
        return cls((0,) + (METRIC_MAX,) * (n - 1), (0,) * n, 0)


@dataclass(frozen=True)
class Predecessors:
    """For each new state ``n``: its two predecessors and the branch labels.

    ``pred0[n] = n >> 1`` and ``pred1[n] = pred0[n] + num_states / 2``;
    decision bit 0 selects ``pred0``.
    """

    pred0: Tuple[int, ...]
    pred1: Tuple[int, ...]
    label0: Tuple[int, ...]
    label1: Tuple[int, ...]


@lru_cache(maxsize=None)
def predecessors(code: CodeSpec) -> Predecessors:
    half = code.num_states // 2
    p0 = tuple(n >> 1 for n in range(code.num_states))
    p1 = tuple(p + half for p in p0)
    lab0 = tuple(code.output[p][n & 1] for n, p in enumerate(p0))
    lab1 = tuple(code.output[p][n & 1] for n, p in enumerate(p1))
    return Predecessors(p0, p1, lab0, lab1)


def branch_distance(received_dibit: int, expected_dibit: int) -> int:
    x = (received_dibit ^ expected_dibit) & 3
    return (x & 1) + (x >> 1)


def select_likeliest(metrics: Sequence[int]) -> int:
    """Index of the smallest metric, lowest index on ties."""
    best, best_m = 0, metrics[0]
    for i in range(1, len(metrics)):
        if metrics[i] < best_m:
            best, best_m = i, metrics[i]
    return best


def _add_compare_select(code: CodeSpec, metrics, dibit: int):
    """Un-normalized new metrics and decision bits for every state."""
    pr = predecessors(code)
    new = []
    dec = []
    for n in range(code.num_states):
        c0 = metrics[pr.pred0[n]] + branch_distance(dibit, pr.label0[n])
        c1 = metrics[pr.pred1[n]] + branch_distance(dibit, pr.label1[n])
        if c0 > METRIC_MAX:
            c0 = METRIC_MAX
        if c1 > METRIC_MAX:
            c1 = METRIC_MAX
        if c1 < c0:
            new.append(c1)
            dec.append(1)
        else:
            new.append(c0)
            dec.append(0)
    return new, dec


def _step(code: CodeSpec, metrics, registers, dibit: int, reg_mask: int):
    new, dec = _add_compare_select(code, metrics, dibit)
    low = min(new)
    new = [m - low for m in new]
    pr = predecessors(code)
    regs = [
        ((registers[pr.pred1[n] if d else pr.pred0[n]] << 1) | (n & 1)) & reg_mask
        for n, d in enumerate(dec)
    ]
    return new, regs


def acs_step(state: DecoderState, config: DecoderConfig, received_dibit: int) -> DecoderState:
    """One full trellis step: ACS, global normalization, register exchange."""
    mask = (1 << config.traceback_depth) - 1
    metrics, regs = _step(config.code, state.metrics, state.path_registers, received_dibit, mask)
    return DecoderState(tuple(metrics), tuple(regs), state.step_count + 1)


def acs_group(code: CodeSpec, group: int, dibit: int, metrics4: Sequence[int]):
    """ACS for the butterfly group feeding new states ``4j .. 4j+3``.

    ``metrics4`` holds the metrics of predecessors ``2j, 2j+h, 2j+1, 2j+1+h``
    (``h = num_states / 2``) in that order.  Returns the four saturated,
    un-normalized new metrics and the four decision bits.
    """
    pr = predecessors(code)
    by_state = {
        2 * group: metrics4[0],
        2 * group + code.num_states // 2: metrics4[1],
        2 * group + 1: metrics4[2],
        2 * group + 1 + code.num_states // 2: metrics4[3],
    }
    new, dec = [], []
    for n in range(4 * group, 4 * group + 4):
        c0 = min(METRIC_MAX, by_state[pr.pred0[n]] + branch_distance(dibit, pr.label0[n]))
        c1 = min(METRIC_MAX, by_state[pr.pred1[n]] + branch_distance(dibit, pr.label1[n]))
        if c1 < c0:
            new.append(c1)
            dec.append(1)
        else:
            new.append(c0)
            dec.append(0)
    return tuple(new), tuple(dec)


def decode(config: DecoderConfig, dibits: Sequence[int]) -> List[int]:
    code = config.code
    depth = config.traceback_depth
    mask = (1 << depth) - 1
    init = DecoderState.initial(config)
    metrics, regs = list(init.metrics), list(init.path_registers)
    out: List[int] = []
    t = 0
    for d in dibits:
        metrics, regs = _step(code, metrics, regs, d & 3, mask)
        t += 1
        if t >= depth:
            out.append((regs[select_likeliest(metrics)] >> (depth - 1)) & 1)
    out.extend(flush_register(regs[select_likeliest(metrics)], t, depth))
    return out


def flush_register(register: int, steps: int, depth: int) -> List[int]:
    """Bits still held in ``register`` after ``steps`` steps, oldest first."""
    remaining = depth - 1 if steps >= depth else steps
    return [(register >> i) & 1 for i in range(remaining - 1, -1, -1)]


# --- frame-parallel engine -------------------------------------------------


def decode_frames(config: DecoderConfig, dibits: np.ndarray) -> np.ndarray:
    """Decode each row of ``(frames, n)`` dibits; same machine as :func:`decode`.

    Frames run in lockstep with uint64 path registers, so the traceback depth
    is limited to 64.
    """
    dibits = np.asarray(dibits, dtype=np.uint8)
    if dibits.ndim != 2:
        raise ValueError("expected a 2-D (frames, n) array")
    depth = config.traceback_depth
    if depth > 64:
        raise ValueError("frame-parallel decoding supports traceback_depth <= 64")
    code = config.code
    pr = predecessors(code)
    frames, n = dibits.shape
    p0 = np.asarray(pr.pred0)
    p1 = np.asarray(pr.pred1)
    lab0 = np.asarray(pr.label0, dtype=np.uint8)
    lab1 = np.asarray(pr.label1, dtype=np.uint8)
    in_bit = np.arange(code.num_states, dtype=np.uint64) & np.uint64(1)
    mask = np.uint64((1 << depth) - 1) if depth < 64 else np.uint64(0xFFFFFFFFFFFFFFFF)
    top = np.uint64(depth - 1)
    one = np.uint64(1)

    init = DecoderState.initial(config)
    metrics = np.tile(np.asarray(init.metrics, dtype=np.int16), (frames, 1))
    regs = np.zeros((frames, code.num_states), dtype=np.uint64)
    out = np.empty((frames, n), dtype=np.uint8)
    rows = np.arange(frames)

    def distance(r, lab):
        x = (r[:, None] ^ lab[None, :]) & 3
        return (x & 1) + (x >> 1)

    best = np.zeros(frames, dtype=np.int64)
    for t in range(n):
        r = dibits[:, t] & 3
        c0 = np.minimum(metrics[:, p0] + distance(r, lab0), METRIC_MAX)
        c1 = np.minimum(metrics[:, p1] + distance(r, lab1), METRIC_MAX)
        take1 = c1 < c0
        new = np.where(take1, c1, c0)
        metrics = new - new.min(axis=1, keepdims=True)
        surv = np.where(take1, p1[None, :], p0[None, :])
        regs = ((np.take_along_axis(regs, surv, axis=1) << one) | in_bit[None, :]) & mask
        best = np.argmin(metrics, axis=1)
        if t + 1 >= depth:
            out[:, t + 1 - depth] = (regs[rows, best] >> top) & one
    _flush_frames(out, regs[rows, best], n, depth)
    return out


def _flush_frames(out: np.ndarray, final_regs: np.ndarray, steps: int, depth: int) -> None:
    remaining = depth - 1 if steps >= depth else steps
    start = steps - remaining
    for i in range(remaining):
        shift = np.uint64(remaining - 1 - i)
        out[:, start + i] = (final_regs >> shift) & np.uint64(1)


def acs_group_array(code: CodeSpec, group: np.ndarray, dibit: np.ndarray, metrics4: np.ndarray):
    """Array form of :func:`acs_group`; ``metrics4`` has shape ``(..., 4)``.

    Returns ``(new, dec)`` with shape ``(..., 4)`` each.
    """
    pr = predecessors(code)
    group = np.asarray(group, dtype=np.int64)
    dibit = np.asarray(dibit, dtype=np.int64)
    m = np.asarray(metrics4, dtype=np.int64)
    new = np.empty(m.shape, dtype=np.int64)
    dec = np.empty(m.shape, dtype=np.int64)
    lab0 = np.asarray(pr.label0)
    lab1 = np.asarray(pr.label1)
    for i in range(4):
        n = 4 * group + i
        # field index of each predecessor inside metrics4
        f0 = (i >> 1) * 2
        f1 = f0 + 1
        x0 = (dibit ^ lab0[n]) & 3
        x1 = (dibit ^ lab1[n]) & 3
        c0 = np.minimum(m[..., f0] + (x0 & 1) + (x0 >> 1), METRIC_MAX)
        c1 = np.minimum(m[..., f1] + (x1 & 1) + (x1 >> 1), METRIC_MAX)
        take1 = c1 < c0
        new[..., i] = np.where(take1, c1, c0)
        dec[..., i] = take1
    return new, dec
