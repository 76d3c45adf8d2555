"""Linear MMSE hard-decision detector.

s_hat = (H^H H + 2 sigma_n2 I)^-1 H^H y with unit symbol energy; the
regularizer is the total complex noise variance. Output LLRs are the
hard demapped bits scaled to the LLR cap, so downstream consumers see a
fully confident (but uncalibrated) soft output.
"""

from __future__ import annotations

import numpy as np

from ..model import LLR_CAP
from ..qam import demap_hard
from .types import DetectorInput, DetectorOutput, make_output


def mmse_solution(inp: DetectorInput) -> np.ndarray:
    """The linear MMSE symbol estimate for this observation."""
    h = inp.h
    gram = h.conj().T @ h + 2.0 * inp.sigma_n2 * np.eye(h.shape[0])
    return np.linalg.solve(gram, h.conj().T @ inp.y)


def mmse_detect(inp: DetectorInput) -> DetectorOutput:
    s_hat = mmse_solution(inp)
    bits = demap_hard(s_hat, inp.constellation)
    lambda_e = LLR_CAP * bits.astype(np.float64)
    return make_output(lambda_e, inp.lambda_a, s_hat=s_hat)
