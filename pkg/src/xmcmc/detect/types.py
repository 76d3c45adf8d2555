"""Shared detector input/output containers and the Gibbs trace record."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..model import LLR_CAP, clip_llr
from ..qam import Constellation


@dataclass
class DetectorInput:
    """Everything a soft detector needs for one observation.

    lambda_a holds a-priori LLRs (defaults to all zeros). tx_bits is
    optional ground truth, required only by oracle diagnostics and the
    state-error columns of a trace.
    """

    y: np.ndarray
    h: np.ndarray
    sigma_n2: float
    constellation: Constellation
    lambda_a: np.ndarray | None = None
    tx_bits: np.ndarray | None = None

    def __post_init__(self) -> None:
        self.y = np.asarray(self.y, dtype=np.complex128)
        self.h = np.asarray(self.h, dtype=np.complex128)
        if self.sigma_n2 <= 0:
            raise ValueError("sigma_n2 must be positive for detection")
        k = self.n_bits
        if self.lambda_a is None:
            self.lambda_a = np.zeros(k)
        else:
            self.lambda_a = clip_llr(np.asarray(self.lambda_a, dtype=np.float64))
            if self.lambda_a.shape != (k,):
                raise ValueError(f"lambda_a must have shape ({k},)")
            if not np.all(np.isfinite(self.lambda_a)):
                raise ValueError("lambda_a must be finite")
        if self.tx_bits is not None:
            self.tx_bits = np.asarray(self.tx_bits, dtype=np.int8)
            if self.tx_bits.shape != (k,):
                raise ValueError(f"tx_bits must have shape ({k},)")

    @property
    def n_antennas(self) -> int:
        return self.h.shape[0]

    @property
    def n_bits(self) -> int:
        return self.h.shape[0] * self.constellation.bits_per_symbol


@dataclass
class GibbsTrace:
    """Per-bit-step records from one MCMC detector call, columnar.

    state_error is the error of the scanned bit right after its step
    (-1 when no ground truth was attached). p_gibbs and determinism are
    NaN on forced-escape steps, which consume no acceptance draw.
    d_plus / d_minus are the bit-forced pair distances; d_true is the
    distance with the scanned bit forced to its transmitted value (NaN
    without ground truth).
    """

    n_gibbs: int
    n_iter: int
    n_bits: int
    sampler: np.ndarray
    iteration: np.ndarray
    k: np.ndarray
    p_gibbs: np.ndarray
    determinism: np.ndarray
    state_error: np.ndarray
    forced_flip: np.ndarray
    changed: np.ndarray
    d_plus: np.ndarray
    d_minus: np.ndarray
    d_true: np.ndarray

    def __len__(self) -> int:
        return self.sampler.size


@dataclass
class DetectorOutput:
    """Soft detector result: extrinsic LLRs plus derived hard decisions.

    hard_bits is sign(lambda_e + lambda_a) with ties resolving to +1.
    Optional diagnostics: the MMSE estimate s_hat, the output
    conditioning variance sigma_z2, the distinct sample-list size, a
    one-sided-bit flag mask, and the Gibbs trace.
    """

    lambda_e: np.ndarray
    hard_bits: np.ndarray
    s_hat: np.ndarray | None = None
    sigma_z2: float | None = None
    n_samples: int | None = None
    one_sided: np.ndarray | None = None
    trace: GibbsTrace | None = field(default=None, repr=False)
    sample_list: object | None = field(default=None, repr=False)
    sampler_min_d: np.ndarray | None = None


def make_output(lambda_e: np.ndarray, lambda_a: np.ndarray, **diag) -> DetectorOutput:
    """Clip the extrinsic LLRs and derive hard decisions per the output rule."""
    lambda_e = clip_llr(np.asarray(lambda_e, dtype=np.float64))
    if not np.all(np.isfinite(lambda_e)):
        raise ValueError("lambda_e must be finite")
    posterior = lambda_e + lambda_a
    hard = np.where(posterior >= 0, 1, -1).astype(np.int8)
    return DetectorOutput(lambda_e=lambda_e, hard_bits=hard, **diag)


__all__ = ["LLR_CAP", "DetectorInput", "DetectorOutput", "GibbsTrace", "make_output"]
