"""Brute-force max-log MAP detector over the full symbol-vector grid.

The extrinsic LLR of bit k is
    0.5 * max over states with bit k = +1 of (-d/sigma_n2 + x\\k . la\\k)
  - 0.5 * max over states with bit k = -1 of (the same),
where d = ||y - H s||^2 and the prior dot product excludes bit k. The
enumeration walks all m^n states (chunked, so the override path does not
hold the full grid in memory).
"""

from __future__ import annotations

import warnings

import numpy as np

from ..qam import Constellation
from .types import DetectorInput, DetectorOutput, make_output

DEFAULT_STATE_CAP = 2**20
_CHUNK = 2**16
_ENUM_CACHE: dict[tuple[int, int], tuple[np.ndarray, np.ndarray]] = {}


def bit_positions(n: int, const: Constellation) -> np.ndarray:
    """Position of each of the n*bps bits inside the packed state integer.

    Antenna a occupies bits [bps*a, bps*a + bps) of the state key, with
    the label MSB at the top of its field.
    """
    bps = const.bits_per_symbol
    k = np.arange(n * bps)
    return (bps * (k // bps) + (bps - 1 - k % bps)).astype(np.uint64)


def keys_to_bits(keys: np.ndarray, n: int, const: Constellation) -> np.ndarray:
    """Unpack state keys into antipodal bit rows."""
    pos = bit_positions(n, const)
    extracted = (keys[:, None] >> pos[None, :]) & np.uint64(1)
    return (extracted.astype(np.int8) * 2 - 1)


def keys_to_symbols(keys: np.ndarray, n: int, const: Constellation) -> np.ndarray:
    """Unpack state keys into symbol-vector rows."""
    bps = const.bits_per_symbol
    shifts = (bps * np.arange(n)).astype(np.uint64)
    labels = (keys[:, None] >> shifts[None, :]) & np.uint64(const.m - 1)
    return const.symbols[labels.astype(np.int64)]


def _chunk_tables(
    keys: np.ndarray, n: int, const: Constellation
) -> tuple[np.ndarray, np.ndarray]:
    cache_key = (n, const.m)
    if keys.size <= _CHUNK and 1 << (n * const.bits_per_symbol) <= _CHUNK:
        if cache_key not in _ENUM_CACHE:
            _ENUM_CACHE[cache_key] = (
                keys_to_bits(keys, n, const),
                keys_to_symbols(keys, n, const),
            )
        return _ENUM_CACHE[cache_key]
    return keys_to_bits(keys, n, const), keys_to_symbols(keys, n, const)


def residual_distances(syms: np.ndarray, y: np.ndarray, h: np.ndarray) -> np.ndarray:
    """||y - H s||^2 for each symbol-vector row of ``syms``."""
    resid = y[None, :] - syms @ h.T
    return np.einsum("ij,ij->i", resid.real, resid.real) + np.einsum(
        "ij,ij->i", resid.imag, resid.imag
    )


def state_distances(
    keys: np.ndarray, y: np.ndarray, h: np.ndarray, n: int, const: Constellation
) -> np.ndarray:
    """Squared residuals for packed state keys."""
    return residual_distances(keys_to_symbols(keys, n, const), y, h)


def maxlog_map_detect(inp: DetectorInput, state_cap: int = DEFAULT_STATE_CAP) -> DetectorOutput:
    """Exhaustive max-log MAP soft output.

    Raises when the grid exceeds ``state_cap``; passing a larger cap than
    the default enables big grids with a runtime warning.
    """
    const = inp.constellation
    n = inp.n_antennas
    n_bits = inp.n_bits
    total = const.m**n
    if total > state_cap:
        raise ValueError(
            f"enumeration of {total} states exceeds the cap {state_cap}; "
            f"pass state_cap >= {total} to override"
        )
    if total > DEFAULT_STATE_CAP:
        warnings.warn(
            f"enumerating {total} states above the default cap {DEFAULT_STATE_CAP}",
            RuntimeWarning,
            stacklevel=2,
        )

    lambda_a = inp.lambda_a
    inv_var = 1.0 / inp.sigma_n2
    m_plus = np.full(n_bits, np.inf)
    m_minus = np.full(n_bits, np.inf)
    for start in range(0, total, _CHUNK):
        keys = np.arange(start, min(start + _CHUNK, total), dtype=np.uint64)
        bits, syms = _chunk_tables(keys, n, const)
        d = residual_distances(syms, inp.y, inp.h)
        # minimized quantity: d/sigma_n2 - x . lambda_a (own-bit term removed below)
        base = d * inv_var - bits @ lambda_a
        plus = bits > 0
        m_plus = np.minimum(m_plus, np.where(plus, base[:, None], np.inf).min(axis=0))
        m_minus = np.minimum(m_minus, np.where(plus, np.inf, base[:, None]).min(axis=0))

    lambda_e = 0.5 * (m_minus - m_plus) - lambda_a
    return make_output(lambda_e, lambda_a)
