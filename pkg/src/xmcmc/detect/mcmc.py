"""Classic bitwise MCMC detector (fixed-variance Gibbs scale).

Per bit-step the flip probability uses the scale 1/(2 sigma_n2), i.e.
the shared engine in ``original`` mode; the output LLR is the list
reduction at sigma_n2 without conditioning. Supports a random start or
an MMSE-seeded sampler. A detector instance keeps its samplers' final
states between calls for turbo loops: the MMSE-seeded sampler restarts
from the MMSE solution of each call's input, all others carry over.
"""

from __future__ import annotations

import numpy as np

from ..qam import bits_to_labels, demap_hard
from .gibbs import SampleList, run_gibbs
from .mmse import mmse_solution
from .types import DetectorInput, DetectorOutput

INIT_MODES = ("random", "mmse")


class McmcDetector:
    """Stateful classic MCMC detector (state kept for turbo carry-over)."""

    def __init__(self, n_gibbs: int = 8, n_iter: int = 16, init: str = "random"):
        if init not in INIT_MODES:
            raise ValueError(f"unknown init {init!r}; expected one of {INIT_MODES}")
        self.n_gibbs = n_gibbs
        self.n_iter = n_iter
        self.init = init
        self._carry: list[tuple[int, ...]] | None = None

    def reset(self) -> None:
        """Drop carried sampler states."""
        self._carry = None

    def detect(
        self,
        inp: DetectorInput,
        rng: np.random.Generator,
        trace: bool = False,
        seed_samples: SampleList | None = None,
    ) -> DetectorOutput:
        init_labels: list = (
            list(self._carry) if self._carry is not None else [None] * self.n_gibbs
        )
        if self.init == "mmse":
            hard = demap_hard(mmse_solution(inp), inp.constellation)
            init_labels[0] = tuple(bits_to_labels(hard, inp.constellation).tolist())
        out, finals = run_gibbs(
            inp,
            self.n_gibbs,
            self.n_iter,
            rng,
            mode="original",
            pseudo="off",
            conditioning=False,
            trace=trace,
            init_labels=init_labels,
            seed_samples=seed_samples,
        )
        self._carry = finals
        return out


def mcmc_original_detect(
    inp: DetectorInput,
    n_gibbs: int = 8,
    n_iter: int = 16,
    init: str = "random",
    rng: np.random.Generator | None = None,
    trace: bool = False,
    seed_samples: SampleList | None = None,
) -> DetectorOutput:
    """One-shot classic MCMC detection (no turbo carry-over)."""
    if rng is None:
        raise ValueError("an rng is required")
    det = McmcDetector(n_gibbs=n_gibbs, n_iter=n_iter, init=init)
    return det.detect(inp, rng, trace=trace, seed_samples=seed_samples)
