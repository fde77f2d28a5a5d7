"""Rate-1/2 feed-forward convolutional code and its reference encoder.

Bit convention used throughout the package: the encoder window is
``w = (state << 1) | bit``, i.e. the newest input sits in the least
significant bit and the oldest in bit ``K - 1``.  Output bit ``i`` is the
parity of ``generator_i & w`` and the dibit carries generator 1 in its high
bit.  The state is the ``K - 1`` newest inputs, ``w & (num_states - 1)``.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import List, Sequence, Tuple

import numpy as np


def parity(x: int) -> int:
    return bin(x).count("1") & 1


@dataclass(frozen=True)
class CodeSpec:
    constraint_length: int = 7
    generator_1: int = 0o171
    generator_2: int = 0o133
    rate_inverse: int = 2

    def __post_init__(self):
        k = self.constraint_length
        if k < 3:
            raise ValueError("constraint_length must be >= 3")
        if self.rate_inverse != 2:
            raise ValueError("only rate 1/2 codes are supported")
        top = 1 << (k - 1)
        for name in ("generator_1", "generator_2"):
            g = getattr(self, name)
            if not 0 < g < (1 << k):
                raise ValueError(f"{name}={g:o} does not fit in {k} bits")
            if not (g & 1 and g & top):
                raise ValueError(f"{name}={g:o} must have its MSB and LSB set")

    @property
    def num_states(self) -> int:
        return 1 << (self.constraint_length - 1)

    @property
    def state_mask(self) -> int:
        return self.num_states - 1

    @cached_property
    def next_state(self) -> Tuple[Tuple[int, int], ...]:
        return tuple(
            tuple(transition(self, s, b)[0] for b in (0, 1)) for s in range(self.num_states)
        )

    @cached_property
    def output(self) -> Tuple[Tuple[int, int], ...]:
        """``output[state][bit]`` is the dibit emitted on that transition."""
        return tuple(
            tuple(transition(self, s, b)[1] for b in (0, 1)) for s in range(self.num_states)
        )

    def as_dict(self) -> dict:
        return {
            "constraint_length": self.constraint_length,
            "generator_1": self.generator_1,
            "generator_2": self.generator_2,
        }


DVBT_CODE = CodeSpec()


def transition(spec: CodeSpec, state: int, bit: int) -> Tuple[int, int]:
    """Return ``(next_state, output_dibit)`` for one input bit."""
    if not 0 <= state < spec.num_states:
        raise ValueError(f"state {state} out of range")
    w = (state << 1) | (bit & 1)
    dibit = (parity(spec.generator_1 & w) << 1) | parity(spec.generator_2 & w)
    return w & spec.state_mask, dibit


def encode(spec: CodeSpec, bits: Sequence[int]) -> Tuple[List[int], int]:
    """Encode from the all-zero state; returns ``(dibits, final_state)``."""
    nxt, out = spec.next_state, spec.output
    state = 0
    dibits = []
    for b in bits:
        b &= 1
        dibits.append(out[state][b])
        state = nxt[state][b]
    return dibits, state


def with_tail(spec: CodeSpec, bits: Sequence[int]) -> List[int]:
    """Append the ``K - 1`` zeros that drive the encoder back to state 0."""
    return list(bits) + [0] * (spec.constraint_length - 1)


def encode_frames(spec: CodeSpec, bits: np.ndarray) -> np.ndarray:
    """Encode each row of a ``(frames, n)`` bit array independently."""
    bits = np.asarray(bits, dtype=np.uint8)
    if bits.ndim != 2:
        raise ValueError("expected a 2-D (frames, n) array")
    out = np.asarray(spec.output, dtype=np.uint8)
    nxt = np.asarray(spec.next_state, dtype=np.int64)
    state = np.zeros(bits.shape[0], dtype=np.int64)
    dibits = np.empty(bits.shape, dtype=np.uint8)
    for t in range(bits.shape[1]):
        b = bits[:, t] & 1
        dibits[:, t] = out[state, b]
        state = nxt[state, b]
    return dibits


def dibits_to_bits(dibits: np.ndarray) -> np.ndarray:
    """Split dibits into channel bits, high bit first; last axis doubles."""
    d = np.asarray(dibits, dtype=np.uint8)
    return np.stack([(d >> 1) & 1, d & 1], axis=-1).reshape(*d.shape[:-1], -1)


def bits_to_dibits(bits: np.ndarray) -> np.ndarray:
    b = np.asarray(bits, dtype=np.uint8)
    pairs = b.reshape(*b.shape[:-1], -1, 2)
    return ((pairs[..., 0] & 1) << 1) | (pairs[..., 1] & 1)
