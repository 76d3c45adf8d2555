"""Channel realization generators.

Two models: i.i.d. complex Gaussian entries (unit variance per complex
entry), and a Kronecker exponential-correlation channel
H = R^(1/2) H_w R^(1/2) with R_ij = rho^|i-j| applied on both sides.
The Kronecker model is a simple proxy for a correlated indoor channel;
rho = 0.7 is the conventional hard setting used by the example configs.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .model import ChannelRealization, apply_channel, ebn0_db_to_sigma_n2, random_bits
from .qam import build_constellation, map_bits


@dataclass(frozen=True)
class ChannelSpec:
    """Channel family selector: kind in {"iid", "kronecker"}."""

    kind: str = "iid"
    rho: float = 0.0

    def __post_init__(self) -> None:
        if self.kind not in ("iid", "kronecker"):
            raise ValueError(f"unknown channel kind {self.kind!r}")
        if not 0.0 <= self.rho < 1.0:
            raise ValueError(f"rho must lie in [0, 1), got {self.rho}")


def gen_iid(n: int, rng: np.random.Generator) -> np.ndarray:
    """n x n channel with CN(0, 1) entries."""
    scale = np.sqrt(0.5)
    return rng.normal(scale=scale, size=(n, n)) + 1j * rng.normal(scale=scale, size=(n, n))


def correlation_root(n: int, rho: float) -> np.ndarray:
    """Cholesky factor L of R_ij = rho^|i-j| (L @ L.T = R)."""
    if not 0.0 <= rho < 1.0:
        raise ValueError(f"rho must lie in [0, 1), got {rho}")
    idx = np.arange(n)
    r = rho ** np.abs(idx[:, None] - idx[None, :])
    return np.linalg.cholesky(r)

def gen_kronecker(n: int, rho: float, rng: np.random.Generator) -> np.ndarray:
    """Exponentially correlated channel, same R on both link ends."""
    root = correlation_root(n, rho)
    return root @ gen_iid(n, rng) @ root.T


def gen_channel(spec: ChannelSpec, n: int, rng: np.random.Generator) -> np.ndarray:
    if spec.kind == "iid":
        return gen_iid(n, rng)
    return gen_kronecker(n, spec.rho, rng)


def make_realization(
    n: int,
    m: int,
    ebn0_db: float,
    channel: ChannelSpec,
    rng: np.random.Generator,
) -> ChannelRealization:
    """Draw one (H, tx bits, y) tuple; rng order is H, bits, noise."""
    const = build_constellation(m)
    h = gen_channel(channel, n, rng)
    tx_bits = random_bits(n * const.bits_per_symbol, rng)
    sigma_n2 = ebn0_db_to_sigma_n2(ebn0_db, m)
    y = apply_channel(h, map_bits(tx_bits, const), sigma_n2, rng)
    return ChannelRealization(h=h, sigma_n2=sigma_n2, tx_bits=tx_bits, y=y)
