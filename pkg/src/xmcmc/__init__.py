"""Soft-output MIMO detection with excited MCMC sampling.

The package provides a max-log MAP oracle, an MMSE baseline, the
classic bitwise Gibbs (MCMC) detector and an excited variant whose
transition probabilities adapt to the sampler's own residual errors,
plus a simulation driver for BER, convergence, EXIT and trace
experiments.
"""

from .channels import ChannelSpec, gen_channel, make_realization
from .config import ConfigError, DetectorSpec, ExperimentConfig, load_config, parse_config
from .detect import (
    DetectorInput,
    DetectorOutput,
    GibbsTrace,
    McmcDetector,
    XmcmcDetector,
    maxlog_map_detect,
    mcmc_original_detect,
    mmse_detect,
    xmcmc_detect,
)
from .metrics import (
    BerAccumulator,
    j_function,
    j_inverse,
    llr_error_ratio,
    mutual_information,
    synthetic_prior_llrs,
)
from .model import LLR_CAP, ChannelRealization, ebn0_db_to_sigma_n2
from .qam import QAM_ORDERS, Constellation, build_constellation
from .runner import ExperimentError, run_experiment
from .seeding import derive_seed, make_rng

__version__ = "0.1.0"

__all__ = [
    "BerAccumulator",
    "ChannelRealization",
    "ChannelSpec",
    "ConfigError",
    "Constellation",
    "DetectorInput",
    "DetectorOutput",
    "DetectorSpec",
    "ExperimentConfig",
    "ExperimentError",
    "GibbsTrace",
    "LLR_CAP",
    "McmcDetector",
    "QAM_ORDERS",
    "XmcmcDetector",
    "build_constellation",
    "derive_seed",
    "ebn0_db_to_sigma_n2",
    "gen_channel",
    "j_function",
    "j_inverse",
    "llr_error_ratio",
    "load_config",
    "make_realization",
    "make_rng",
    "maxlog_map_detect",
    "mcmc_original_detect",
    "mmse_detect",
    "mutual_information",
    "parse_config",
    "run_experiment",
    "synthetic_prior_llrs",
    "xmcmc_detect",
]
