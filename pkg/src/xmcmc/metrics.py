"""Evaluation metrics: BER accounting, LLR quality, EXIT tooling, traces.

The EXIT helpers use the standard two-piece polynomial/exponential fits
for the mutual information of a consistent Gaussian LLR (J) and its
inverse; the coefficients are restated in the README. Mutual information
of measured LLRs uses the time-average estimator
I = 1 - mean(log2(1 + exp(-x * llr))), clipped to [0, 1].
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .detect.types import GibbsTrace
from .model import clip_llr


@dataclass
class BerAccumulator:
    """Bit error counts that merge associatively across workers."""

    n_bits: int = 0
    n_errors: int = 0

    def update(self, hard_bits: np.ndarray, tx_bits: np.ndarray) -> None:
        hard_bits = np.asarray(hard_bits)
        tx_bits = np.asarray(tx_bits)
        if hard_bits.shape != tx_bits.shape:
            raise ValueError("hard_bits and tx_bits must have identical shape")
        self.n_bits += hard_bits.size
        self.n_errors += int(np.count_nonzero(hard_bits != tx_bits))

    def merge(self, other: "BerAccumulator") -> "BerAccumulator":
        return BerAccumulator(self.n_bits + other.n_bits, self.n_errors + other.n_errors)

    @property
    def ber(self) -> float:
        if self.n_bits == 0:
            raise ValueError("no bits accumulated")
        return self.n_errors / self.n_bits


def llr_error_ratio(
    lambda_e: np.ndarray, lambda_map: np.ndarray, tol: float = 1e-12
) -> np.ndarray:
    """Per-bit |lambda_e - lambda_map| over this realization's mean |lambda_map|."""
    lambda_e = np.asarray(lambda_e, dtype=np.float64)
    lambda_map = np.asarray(lambda_map, dtype=np.float64)
    if lambda_e.shape != lambda_map.shape:
        raise ValueError("LLR vectors must have identical shape")
    ref = float(np.mean(np.abs(lambda_map)))
    if ref < tol:
        raise ValueError("MAP reference LLRs are all (near) zero")
    return np.abs(lambda_e - lambda_map) / ref


# two-piece fits for the mutual information of a consistent Gaussian LLR
_J_SIGMA_STAR = 1.6363
_J_INV_I_STAR = 0.3646
_I_A_MAX = 0.9999


def j_function(sigma: float) -> float:
    """Mutual information of a consistent Gaussian LLR with std ``sigma``."""
    if sigma < 0:
        raise ValueError("sigma must be non-negative")
    if sigma <= _J_SIGMA_STAR:
        return float(-0.0421061 * sigma**3 + 0.209252 * sigma**2 - 0.00640081 * sigma)
    if sigma < 10.0:
        return float(
            1.0
            - np.exp(
                0.00181491 * sigma**3
                - 0.142675 * sigma**2
                - 0.0822054 * sigma
                + 0.0549608
            )
        )
    return 1.0


def j_inverse(i: float) -> float:
    """LLR std that yields mutual information ``i`` (i in [0, 1))."""
    if not 0.0 <= i <= 1.0:
        raise ValueError("mutual information must lie in [0, 1]")
    i = min(i, _I_A_MAX)
    if i <= _J_INV_I_STAR:
        return float(1.09542 * i**2 + 0.214217 * i + 2.33727 * np.sqrt(i))
    return float(-0.706692 * np.log(0.386013 * (1.0 - i)) + 1.75017 * i)


def synthetic_prior_llrs(
    i_a: float, tx_bits: np.ndarray, rng: np.random.Generator
) -> np.ndarray:
    """Consistent Gaussian a-priori LLRs with target mutual information i_a.

    lambda_a = (sigma_a^2 / 2) x + sigma_a g with sigma_a = j_inverse(i_a);
    i_a = 1 is capped at j_inverse(0.9999). Output is LLR-capped.
    """
    tx_bits = np.asarray(tx_bits, dtype=np.float64)
    sigma_a = j_inverse(i_a)
    llrs = 0.5 * sigma_a**2 * tx_bits + sigma_a * rng.normal(size=tx_bits.size)
    return clip_llr(llrs)


def mutual_information(llrs: np.ndarray, tx_bits: np.ndarray) -> float:
    """Time-average mutual information between bits and their LLRs."""
    llrs = np.asarray(llrs, dtype=np.float64)
    tx_bits = np.asarray(tx_bits, dtype=np.float64)
    if llrs.shape != tx_bits.shape:
        raise ValueError("llrs and tx_bits must have identical shape")
    if llrs.size == 0:
        raise ValueError("no bits supplied")
    loss = float(np.mean(np.logaddexp(0.0, -tx_bits * llrs))) / np.log(2.0)
    return float(np.clip(1.0 - loss, 0.0, 1.0))


def mutual_information_terms(llrs: np.ndarray, tx_bits: np.ndarray) -> tuple[float, int]:
    """(sum of per-bit information losses in bits, bit count) for pooling."""
    llrs = np.asarray(llrs, dtype=np.float64)
    tx_bits = np.asarray(tx_bits, dtype=np.float64)
    loss = float(np.sum(np.logaddexp(0.0, -tx_bits * llrs))) / np.log(2.0)
    return loss, llrs.size


def pooled_mutual_information(loss_sum: float, n_bits: int) -> float:
    if n_bits == 0:
        raise ValueError("no bits pooled")
    return float(np.clip(1.0 - loss_sum / n_bits, 0.0, 1.0))


def trace_matrices(trace: GibbsTrace) -> dict[str, np.ndarray]:
    """Reshape a trace into per-sampler (iteration x bit) matrices.

    Returns determinism and state_error stacks of shape
    (n_gibbs, n_iter, n_bits) plus sampler-averaged views. Forced-escape
    cells are NaN in the determinism matrices and are ignored by the
    average; state_error averages use the float fraction of samplers in
    error (all -1 without ground truth).
    """
    shape = (trace.n_gibbs, trace.n_iter, trace.n_bits)
    if len(trace) != trace.n_gibbs * trace.n_iter * trace.n_bits:
        raise ValueError("trace is not a complete sampler/iteration/bit grid")
    order = np.lexsort((trace.k, trace.iteration, trace.sampler))
    det = trace.determinism[order].reshape(shape)
    err = trace.state_error[order].reshape(shape).astype(np.float64)
    changed = trace.changed[order].reshape(shape)
    with warnings.catch_warnings():
        # a cell where every sampler was forced has no drawn steps to average
        warnings.simplefilter("ignore", RuntimeWarning)
        det_mean = np.nanmean(det, axis=0)
    return {
        "determinism": det,
        "state_error": err,
        "changed": changed,
        "determinism_mean": det_mean,
        "state_error_mean": err.mean(axis=0),
    }


def changes_after_iteration(trace: GibbsTrace, iteration: int) -> int:
    """Count accepted or forced bit changes in iterations > ``iteration`` (0-based)."""
    return int(np.count_nonzero(trace.changed[trace.iteration > iteration]))
