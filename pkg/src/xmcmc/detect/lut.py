"""Mantissa-indexed reciprocal lookup table.

Splits x > 0 as x = m * 2^e with m in [1, 2), indexes a 2^bits table by
the top mantissa bits, and returns the stored reciprocal of the cell
midpoint scaled by 2^-e. Worst-case relative error for ``bits`` index
bits is (2^-(bits+1)) / (1 + 2^-(bits+1)), about 5.9% at bits = 3.
"""

from __future__ import annotations

import math

import numpy as np


class ReciprocalLut:
    """Callable approximate reciprocal with a fixed mantissa resolution."""

    def __init__(self, bits: int):
        if bits < 1:
            raise ValueError("bits must be >= 1")
        self.bits = bits
        size = 1 << bits
        midpoints = 1.0 + (np.arange(size) + 0.5) / size
        self.table = 1.0 / midpoints

    def __call__(self, x):
        if isinstance(x, np.ndarray):
            if np.any(x <= 0):
                raise ValueError("reciprocal lut requires positive input")
            mant, ex = np.frexp(x)  # mant in [0.5, 1)
            idx = ((2.0 * mant - 1.0) * self.table.size).astype(np.int64)
            np.clip(idx, 0, self.table.size - 1, out=idx)
            return np.ldexp(self.table[idx], 1 - ex)
        if x <= 0:
            raise ValueError("reciprocal lut requires positive input")
        mant, ex = math.frexp(x)
        idx = int((2.0 * mant - 1.0) * self.table.size)
        if idx >= self.table.size:
            idx = self.table.size - 1
        return math.ldexp(self.table[idx], 1 - ex)
