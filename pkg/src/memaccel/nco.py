"""Fractional frequency-offset correction from a bank of tabled tones.

A general local oscillator is replaced by one table per admissible offset,
each holding a full period of ``exp(-2j*pi*eps*k/N)`` in Q1.15 fixed point.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence, Union

import numpy as np

from memaccel.errors import IndexOutOfRange

FRAC_BITS = 15
SCALE = 1 << FRAC_BITS

Offset = Union[float, Fraction, int]


def quantize(x: np.ndarray) -> np.ndarray:
    """Round float components to int16 Q1.15, saturating at the range ends."""
    return np.clip(np.rint(np.asarray(x) * SCALE), -SCALE, SCALE - 1).astype(np.int16)


def _phase_turns(eps: Offset, n_samples: int) -> np.ndarray:
    k = np.arange(n_samples)
    if isinstance(eps, (Fraction, int)):
        eps = Fraction(eps)
        # exact reduction mod 1 keeps quarter turns exact
        num = (eps.numerator * k) % (eps.denominator * n_samples)
        return num / (eps.denominator * n_samples)
    return np.mod(eps * k / n_samples, 1.0)


def float_tone(eps: Offset, n_samples: int) -> np.ndarray:
    return np.exp(-2j * np.pi * _phase_turns(eps, n_samples))


@dataclass(frozen=True, eq=False)
class ToneBank:
    n_samples: int
    offsets: tuple
    tones: np.ndarray  # (len(offsets), n_samples, 2) int16, [re, im]

    @property
    def nbytes(self) -> int:
        return self.tones.nbytes

    def tone(self, offset_index: int) -> np.ndarray:
        """Dequantized complex tone for one offset."""
        self._check(offset_index)
        t = self.tones[offset_index].astype(np.float64) / SCALE
        return t[:, 0] + 1j * t[:, 1]

    def index_of(self, eps: Offset) -> int:
        return self.offsets.index(eps)

    def _check(self, offset_index: int) -> None:
        if not 0 <= offset_index < len(self.offsets):
            raise IndexOutOfRange(f"offset index {offset_index} not in 0..{len(self.offsets) - 1}")


def build_tone_bank(n_samples: int, offsets: Sequence[Offset]) -> ToneBank:
    if n_samples <= 0:
        raise ValueError("n_samples must be positive")
    tones = np.empty((len(offsets), n_samples, 2), dtype=np.int16)
    for i, eps in enumerate(offsets):
        t = float_tone(eps, n_samples)
        tones[i, :, 0] = quantize(t.real)
        tones[i, :, 1] = quantize(t.imag)
    tones.flags.writeable = False
    return ToneBank(n_samples, tuple(offsets), tones)


def correct(bank: ToneBank, samples: np.ndarray, offset_index: int) -> np.ndarray:
    """Multiply ``samples`` elementwise by the selected tabled tone."""
    bank._check(offset_index)
    samples = np.asarray(samples)
    if samples.shape != (bank.n_samples,):
        raise ValueError(f"expected {bank.n_samples} samples, got shape {samples.shape}")
    t = bank.tones[offset_index]
    # (a + jb)(c + jd) with the table components scaled back from Q1.15
    c = t[:, 0] * (1.0 / SCALE)
    d = t[:, 1] * (1.0 / SCALE)
    a, b = samples.real, samples.imag
    return (a * c - b * d) + 1j * (a * d + b * c)


def correct_float(samples: np.ndarray, eps: Offset, n_samples: int) -> np.ndarray:
    """Computation-only corrector: evaluates the exponential on every call."""
    k = np.arange(n_samples)
    return np.asarray(samples) * np.exp(-2j * np.pi * float(eps) * k / n_samples)
