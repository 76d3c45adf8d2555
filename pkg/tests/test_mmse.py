"""Linear MMSE detector against a directly-built Wiener filter."""

import numpy as np
import pytest

from xmcmc.detect import DetectorInput, mmse_detect
from xmcmc.detect.mmse import mmse_solution
from xmcmc.model import LLR_CAP
from xmcmc.qam import build_constellation, demap_hard, map_bits

SEED = 51


def random_case(rng, n=4, m=16, sigma_n2=0.05):
    const = build_constellation(m)
    h = (rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))) * np.sqrt(0.5)
    bits = np.where(rng.random(n * const.bits_per_symbol) < 0.5, 1, -1).astype(np.int8)
    s = map_bits(bits, const)
    noise = (rng.normal(size=n) + 1j * rng.normal(size=n)) * np.sqrt(sigma_n2)
    return DetectorInput(
        y=h @ s + noise, h=h, sigma_n2=sigma_n2, constellation=const, tx_bits=bits
    )


def test_solution_matches_explicit_inverse():
    rng = np.random.default_rng(SEED)
    for _ in range(20):
        inp = random_case(rng)
        expected = (
            np.linalg.inv(
                inp.h.conj().T @ inp.h + 2.0 * inp.sigma_n2 * np.eye(inp.h.shape[0])
            )
            @ inp.h.conj().T
            @ inp.y
        )
        np.testing.assert_allclose(mmse_solution(inp), expected, rtol=1e-10)


def test_high_snr_approaches_zero_forcing():
    rng = np.random.default_rng(SEED)
    inp = random_case(rng, sigma_n2=1e-10)
    zf = np.linalg.solve(inp.h, inp.y)
    np.testing.assert_allclose(mmse_solution(inp), zf, rtol=1e-4)


def test_noiseless_recovers_bits():
    rng = np.random.default_rng(SEED)
    const = build_constellation(16)
    h = (rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))) * np.sqrt(0.5)
    bits = np.where(rng.random(16) < 0.5, 1, -1).astype(np.int8)
    inp = DetectorInput(
        y=h @ map_bits(bits, const),
        h=h,
        sigma_n2=1e-9,
        constellation=const,
        tx_bits=bits,
    )
    out = mmse_detect(inp)
    np.testing.assert_array_equal(out.hard_bits, bits)


def test_output_is_capped_hard_llrs():
    rng = np.random.default_rng(SEED)
    inp = random_case(rng)
    out = mmse_detect(inp)
    hard = demap_hard(mmse_solution(inp), inp.constellation)
    np.testing.assert_array_equal(out.lambda_e, LLR_CAP * hard.astype(float))
    np.testing.assert_array_equal(out.hard_bits, hard)
    np.testing.assert_allclose(out.s_hat, mmse_solution(inp))


def test_prior_subtraction_in_posterior_sign():
    """Hard bits follow lambda_e + lambda_a even for this prior-blind detector."""
    rng = np.random.default_rng(SEED)
    inp = random_case(rng)
    strong = np.full(inp.n_bits, 2 * LLR_CAP)
    inp_prior = DetectorInput(
        y=inp.y,
        h=inp.h,
        sigma_n2=inp.sigma_n2,
        constellation=inp.constellation,
        lambda_a=strong,
    )
    out = mmse_detect(inp_prior)
    # prior is clipped to +cap; extrinsic is +/-cap, so ties resolve to +1
    assert np.all(out.hard_bits[out.lambda_e >= 0] == 1)
