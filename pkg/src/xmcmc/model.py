"""Complex MIMO system model: y = H s + n.

H is N x N complex, s holds unit-energy QAM symbols, and n is circular
complex Gaussian noise with variance ``sigma_n2`` per real dimension.
All LLR vectors are magnitude-capped at ``LLR_CAP`` at module boundaries.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .qam import Constellation, map_bits

LLR_CAP = 50.0


def clip_llr(llr: np.ndarray) -> np.ndarray:
    """Clip LLR magnitudes to the module-boundary cap."""
    return np.clip(llr, -LLR_CAP, LLR_CAP)


def ebn0_db_to_sigma_n2(ebn0_db: float, m: int, code_rate: float = 1.0) -> float:
    """Per-real-dimension noise variance for an Eb/N0 operating point.

    With unit symbol energy and N transmit antennas carrying log2(m) bits
    each, sigma_n2 = Es*N / (2*log2(m)*N*code_rate*(Eb/N0)); the antenna
    count cancels. code_rate is 1 for uncoded runs.
    """
    bits = np.log2(m)
    return float(1.0 / (2.0 * bits * code_rate * 10.0 ** (ebn0_db / 10.0)))


@dataclass
class ChannelRealization:
    """One Monte Carlo draw: channel, noise level, transmitted bits, observation."""

    h: np.ndarray
    sigma_n2: float
    tx_bits: np.ndarray
    y: np.ndarray

    def __post_init__(self) -> None:
        if self.sigma_n2 < 0:
            raise ValueError("sigma_n2 must be non-negative")


def random_bits(k: int, rng: np.random.Generator) -> np.ndarray:
    """Uniform antipodal bits, +1 where the uniform draw falls below 0.5."""
    return np.where(rng.random(k) < 0.5, 1, -1).astype(np.int8)


def apply_channel(
    h: np.ndarray, symbols: np.ndarray, sigma_n2: float, rng: np.random.Generator
) -> np.ndarray:
    """Propagate symbols through h and add complex Gaussian noise.

    sigma_n2 is the variance per real dimension; sigma_n2 = 0 returns
    H s exactly.
    """
    if sigma_n2 < 0:
        raise ValueError("sigma_n2 must be non-negative")
    n = h.shape[0]
    std = np.sqrt(sigma_n2)
    noise = rng.normal(scale=std, size=n) + 1j * rng.normal(scale=std, size=n)
    return h @ symbols + noise


def distance(y: np.ndarray, h: np.ndarray, symbols: np.ndarray) -> float:
    """Squared Euclidean residual ||y - H s||^2 (direct recomputation)."""
    r = y - h @ symbols
    return float(np.real(r @ r.conj()))


def distance_pair_k(
    y: np.ndarray,
    h: np.ndarray,
    bits: np.ndarray,
    k: int,
    const: Constellation,
) -> tuple[float, float]:
    """Distances with bit k forced to +1 and to -1, all other bits kept.

    Exactly one of the pair equals the unforced distance of ``bits``.
    """
    bits = np.asarray(bits)
    if not 0 <= k < bits.size:
        raise IndexError(f"bit index {k} out of range for {bits.size} bits")
    forced = bits.copy()
    forced[k] = 1
    d_plus = distance(y, h, map_bits(forced, const))
    forced[k] = -1
    d_minus = distance(y, h, map_bits(forced, const))
    return d_plus, d_minus
