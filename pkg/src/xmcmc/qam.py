"""Gray-coded square QAM constellations with antipodal bit labels.

Bits take values in {+1, -1}. A symbol label is read MSB-first with the
in-phase bits before the quadrature bits; bit value +1 maps to binary 1.
Each axis uses its own reflected Gray code, so nearest neighbours in the
constellation differ in exactly one label bit. Tables are normalized to
unit average symbol energy.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

QAM_ORDERS = (4, 16, 64, 256)


@dataclass(frozen=True)
class Constellation:
    """Lookup tables for one square QAM order.

    symbols[label] is the complex point whose bit label (MSB-first,
    I bits then Q bits, +1 -> binary 1) equals ``label``.
    """

    m: int
    bits_per_symbol: int
    bits_per_axis: int
    symbols: np.ndarray
    axis_levels: np.ndarray
    bits_by_label: np.ndarray = field(repr=False)

    @property
    def min_spacing(self) -> float:
        """Distance between nearest neighbours."""
        lv = np.sort(self.axis_levels)
        return float(lv[1] - lv[0])


def _gray(i: int) -> int:
    return i ^ (i >> 1)


_CACHE: dict[int, Constellation] = {}


def build_constellation(m: int) -> Constellation:
    """Build (and cache) the Gray-labeled constellation for order ``m``."""
    if m not in QAM_ORDERS:
        raise ValueError(f"unsupported QAM order {m}; expected one of {QAM_ORDERS}")
    if m in _CACHE:
        return _CACHE[m]

    bps = int(np.log2(m))
    bpa = bps // 2
    levels_per_axis = 1 << bpa
    # level i (ascending amplitude) carries Gray label gray(i)
    amps = np.empty(levels_per_axis)
    for i in range(levels_per_axis):
        amps[_gray(i)] = 2 * i - (levels_per_axis - 1)
    scale = np.sqrt(2.0 * (levels_per_axis**2 - 1) / 3.0)
    amps /= scale

    symbols = np.empty(m, dtype=np.complex128)
    bits_by_label = np.empty((m, bps), dtype=np.int8)
    for label in range(m):
        i_label = label >> bpa
        q_label = label & (levels_per_axis - 1)
        symbols[label] = amps[i_label] + 1j * amps[q_label]
        for j in range(bps):
            bits_by_label[label, j] = 1 if (label >> (bps - 1 - j)) & 1 else -1

    const = Constellation(
        m=m,
        bits_per_symbol=bps,
        bits_per_axis=bpa,
        symbols=symbols,
        axis_levels=amps.copy(),
        bits_by_label=bits_by_label,
    )
    _CACHE[m] = const
    return const


def _check_bits(bits: np.ndarray) -> np.ndarray:
    bits = np.asarray(bits)
    if not np.all(np.abs(bits) == 1):
        raise ValueError("bits must take values in {+1, -1}")
    return bits.astype(np.int8, copy=False)


def bits_to_labels(bits: np.ndarray, const: Constellation) -> np.ndarray:
    """Pack antipodal bits into per-antenna label integers (MSB-first)."""
    bits = _check_bits(bits)
    bps = const.bits_per_symbol
    if bits.size % bps:
        raise ValueError(f"bit count {bits.size} is not a multiple of {bps}")
    groups = (bits.reshape(-1, bps) > 0).astype(np.int64)
    weights = 1 << np.arange(bps - 1, -1, -1, dtype=np.int64)
    return groups @ weights


def map_bits(bits: np.ndarray, const: Constellation) -> np.ndarray:
    """Map a bit vector to one symbol per ``bits_per_symbol`` group."""
    return const.symbols[bits_to_labels(bits, const)]


def demap_hard(received: np.ndarray, const: Constellation) -> np.ndarray:
    """Nearest-point hard demapping back to antipodal bits.

    Exact distance ties resolve toward the label whose first differing
    bit is +1 (equivalently the largest label integer), so the origin
    demaps to the all-plus label.
    """
    received = np.atleast_1d(np.asarray(received, dtype=np.complex128))
    d2 = np.abs(received[:, None] - const.symbols[None, :]) ** 2
    best = d2.min(axis=1, keepdims=True)
    labels = np.where(d2 == best, np.arange(const.m), -1).max(axis=1)
    return const.bits_by_label[labels].reshape(-1)
