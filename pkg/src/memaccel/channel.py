"""Binary symmetric channel driven by a seeded generator."""

from __future__ import annotations

import numpy as np

from memaccel.trellis import bits_to_dibits, dibits_to_bits


def bsc(bits, p: float, seed: int) -> np.ndarray:
    """Flip each bit independently with probability ``p``."""
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"crossover probability {p} not in [0, 1]")
    bits = np.asarray(bits, dtype=np.uint8)
    flips = np.random.default_rng(seed).random(bits.shape) < p
    return bits ^ flips.astype(np.uint8)


def bsc_dibits(dibits, p: float, seed: int) -> np.ndarray:
    """Send dibits over the channel as two bits each, high bit first."""
    dibits = np.asarray(dibits, dtype=np.uint8)
    return bits_to_dibits(bsc(dibits_to_bits(dibits), p, seed))
