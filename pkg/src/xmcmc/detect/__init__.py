"""Detector implementations: max-log MAP, MMSE, bitwise MCMC, excited MCMC."""

from .gibbs import (
    ESTIMATOR_MODES,
    MotionMonitor,
    SampleList,
    conditioning_variance,
    determinism,
    estimate_error_energy,
    forced_flip,
    gibbs_bit_llr,
    gibbs_probability,
    list_output_llr,
)
from .lut import ReciprocalLut
from .maxlog import DEFAULT_STATE_CAP, maxlog_map_detect
from .mcmc import McmcDetector, mcmc_original_detect
from .mmse import mmse_detect
from .types import DetectorInput, DetectorOutput, GibbsTrace
from .xmcmc import XmcmcDetector, xmcmc_detect

__all__ = [
    "DEFAULT_STATE_CAP",
    "ESTIMATOR_MODES",
    "DetectorInput",
    "DetectorOutput",
    "GibbsTrace",
    "McmcDetector",
    "MotionMonitor",
    "ReciprocalLut",
    "SampleList",
    "XmcmcDetector",
    "conditioning_variance",
    "determinism",
    "estimate_error_energy",
    "forced_flip",
    "gibbs_bit_llr",
    "gibbs_probability",
    "list_output_llr",
    "maxlog_map_detect",
    "mcmc_original_detect",
    "mmse_detect",
    "xmcmc_detect",
]
