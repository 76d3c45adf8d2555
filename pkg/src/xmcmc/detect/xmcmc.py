"""Excited MCMC detector.

The flip probability scales the distance difference by an adaptive
error-energy estimate instead of the fixed noise floor, which keeps the
sampler moving at high SNR; a motion monitor breaks pseudo-convergence
with a forced one-bit escape (or a full restart); and the output LLRs
are conditioned on sigma_z2 = max(sigma_n2, min_d / 2N) so an
unconverged list cannot produce overconfident magnitudes.

Defaults: estimator mode "min", pseudo escape "flip", conditioning on,
motion threshold of one full scan (N * bits-per-symbol steps).
"""

from __future__ import annotations

import numpy as np

from .gibbs import SampleList, run_gibbs
from .types import DetectorInput, DetectorOutput


class XmcmcDetector:
    """Excited MCMC detector; stateless between calls (fresh random starts)."""

    def __init__(
        self,
        n_gibbs: int = 8,
        n_iter: int = 16,
        mode: str = "min",
        pseudo: str = "flip",
        conditioning: bool = True,
        lut_bits: int | None = None,
        n_motion: int | None = None,
        output_mode: str = "exact",
    ):
        self.n_gibbs = n_gibbs
        self.n_iter = n_iter
        self.mode = mode
        self.pseudo = pseudo
        self.conditioning = conditioning
        self.lut_bits = lut_bits
        self.n_motion = n_motion
        self.output_mode = output_mode

    def detect(
        self,
        inp: DetectorInput,
        rng: np.random.Generator,
        trace: bool = False,
        seed_samples: SampleList | None = None,
    ) -> DetectorOutput:
        out, _ = run_gibbs(
            inp,
            self.n_gibbs,
            self.n_iter,
            rng,
            mode=self.mode,
            pseudo=self.pseudo,
            conditioning=self.conditioning,
            lut_bits=self.lut_bits,
            n_motion=self.n_motion,
            output_mode=self.output_mode,
            trace=trace,
            seed_samples=seed_samples,
        )
        return out


def xmcmc_detect(
    inp: DetectorInput,
    n_gibbs: int = 8,
    n_iter: int = 16,
    rng: np.random.Generator | None = None,
    mode: str = "min",
    pseudo: str = "flip",
    conditioning: bool = True,
    lut_bits: int | None = None,
    n_motion: int | None = None,
    output_mode: str = "exact",
    trace: bool = False,
    seed_samples: SampleList | None = None,
) -> DetectorOutput:
    """One-shot excited MCMC detection."""
    if rng is None:
        raise ValueError("an rng is required")
    det = XmcmcDetector(
        n_gibbs=n_gibbs,
        n_iter=n_iter,
        mode=mode,
        pseudo=pseudo,
        conditioning=conditioning,
        lut_bits=lut_bits,
        n_motion=n_motion,
        output_mode=output_mode,
    )
    return det.detect(inp, rng, trace=trace, seed_samples=seed_samples)
