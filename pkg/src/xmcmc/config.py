"""JSON experiment configuration: parsing, validation, defaults.

Unknown keys, invalid enum values, and out-of-range numbers raise
ConfigError with the offending field path. Documented defaults fill in
everything beyond (experiment, n, m, detectors).
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

from .channels import ChannelSpec
from .detect.gibbs import ESTIMATOR_MODES, OUTPUT_MODES, PSEUDO_MODES
from .detect.mcmc import INIT_MODES
from .qam import QAM_ORDERS

EXPERIMENTS = ("ber", "exit", "convergence", "trace")
DETECTOR_KINDS = ("map", "mmse", "mcmc", "xmcmc")

DEFAULT_EBN0_DB = [10.0]
DEFAULT_REALIZATIONS = 200
DEFAULT_MASTER_SEED = 1
DEFAULT_OUTPUT_DIR = "results"
DEFAULT_IA_GRID = [0.0, 0.25, 0.5, 0.75, 1.0]
DEFAULT_N_ITER_SWEEP = [1, 2, 4, 8, 16, 32]


class ConfigError(ValueError):
    """Invalid experiment configuration."""


@dataclass
class DetectorSpec:
    """One detector entry: kind plus its knobs."""

    kind: str
    name: str
    n_gibbs: int = 8
    n_iter: int = 16
    init: str = "random"
    mode: str = "min"
    pseudo: str = "flip"
    conditioning: bool = True
    lut_bits: int | None = None
    n_motion: int | None = None
    output_mode: str = "exact"
    state_cap: int | None = None


@dataclass
class ExperimentConfig:
    experiment: str
    n: int
    m: int
    detectors: list[DetectorSpec]
    channel: ChannelSpec = field(default_factory=ChannelSpec)
    ebn0_db: list[float] = field(default_factory=lambda: list(DEFAULT_EBN0_DB))
    realizations: int = DEFAULT_REALIZATIONS
    master_seed: int = DEFAULT_MASTER_SEED
    output_dir: str = DEFAULT_OUTPUT_DIR
    ia_grid: list[float] = field(default_factory=lambda: list(DEFAULT_IA_GRID))
    n_iter_sweep: list[int] = field(default_factory=lambda: list(DEFAULT_N_ITER_SWEEP))


def _require(cond: bool, path: str, message: str) -> None:
    if not cond:
        raise ConfigError(f"{path}: {message}")


def _check_keys(obj: dict, allowed: set[str], path: str) -> None:
    unknown = set(obj) - allowed
    if unknown:
        name = sorted(unknown)[0]
        raise ConfigError(f"{path}.{name}: unknown key")


def _int_field(obj: dict, key: str, default, path: str, minimum: int | None = None):
    value = obj.get(key, default)
    if value is None:
        return None
    _require(isinstance(value, int) and not isinstance(value, bool), f"{path}.{key}", "must be an integer")
    if minimum is not None:
        _require(value >= minimum, f"{path}.{key}", f"must be >= {minimum}")
    return value


def _number_list(obj: dict, key: str, default, path: str):
    raw = obj.get(key, default)
    _require(isinstance(raw, list) and len(raw) > 0, f"{path}.{key}", "must be a non-empty list")
    out = []
    for i, v in enumerate(raw):
        _require(
            isinstance(v, (int, float)) and not isinstance(v, bool),
            f"{path}.{key}[{i}]",
            "must be a number",
        )
        out.append(float(v))
    return out


def _parse_channel(obj, path: str) -> ChannelSpec:
    _require(isinstance(obj, dict), path, "must be an object")
    _check_keys(obj, {"kind", "rho"}, path)
    kind = obj.get("kind", "iid")
    _require(kind in ("iid", "kronecker"), f"{path}.kind", "must be 'iid' or 'kronecker'")
    rho = obj.get("rho", 0.7 if kind == "kronecker" else 0.0)
    _require(
        isinstance(rho, (int, float)) and not isinstance(rho, bool),
        f"{path}.rho",
        "must be a number",
    )
    _require(0.0 <= rho < 1.0, f"{path}.rho", f"must lie in [0, 1), got {rho}")
    return ChannelSpec(kind=kind, rho=float(rho))


_DETECTOR_ALIASES = {"mcmc-random": ("mcmc", "random"), "mcmc-mmse": ("mcmc", "mmse")}
_COMMON_DET_KEYS = {"kind", "name"}
_DET_KEYS = {
    "map": {"state_cap"},
    "mmse": set(),
    "mcmc": {"n_gibbs", "n_iter", "init"},
    "xmcmc": {
        "n_gibbs",
        "n_iter",
        "mode",
        "pseudo",
        "conditioning",
        "lut_bits",
        "n_motion",
        "output_mode",
    },
}


def _parse_detector(obj, path: str) -> DetectorSpec:
    _require(isinstance(obj, dict), path, "must be an object")
    kind = obj.get("kind")
    _require(kind is not None, f"{path}.kind", "missing required key")
    init = None
    if kind in _DETECTOR_ALIASES:
        kind, init = _DETECTOR_ALIASES[kind]
    _require(
        kind in DETECTOR_KINDS,
        f"{path}.kind",
        f"unknown detector {obj.get('kind')!r}; valid kinds: "
        + ", ".join(DETECTOR_KINDS + tuple(_DETECTOR_ALIASES)),
    )
    _check_keys(obj, _COMMON_DET_KEYS | _DET_KEYS[kind], path)

    spec = DetectorSpec(kind=kind, name="")
    if init is not None:
        spec.init = init
    if kind == "mcmc":
        spec.n_gibbs = _int_field(obj, "n_gibbs", spec.n_gibbs, path, 1)
        spec.n_iter = _int_field(obj, "n_iter", spec.n_iter, path, 1)
        init_val = obj.get("init", spec.init)
        _require(init_val in INIT_MODES, f"{path}.init", f"must be one of {INIT_MODES}")
        spec.init = init_val
    elif kind == "xmcmc":
        spec.n_gibbs = _int_field(obj, "n_gibbs", spec.n_gibbs, path, 1)
        spec.n_iter = _int_field(obj, "n_iter", spec.n_iter, path, 1)
        mode = obj.get("mode", spec.mode)
        _require(mode in ESTIMATOR_MODES, f"{path}.mode", f"must be one of {ESTIMATOR_MODES}")
        spec.mode = mode
        pseudo = obj.get("pseudo", spec.pseudo)
        _require(pseudo in PSEUDO_MODES, f"{path}.pseudo", f"must be one of {PSEUDO_MODES}")
        spec.pseudo = pseudo
        conditioning = obj.get("conditioning", spec.conditioning)
        _require(isinstance(conditioning, bool), f"{path}.conditioning", "must be a boolean")
        spec.conditioning = conditioning
        spec.lut_bits = _int_field(obj, "lut_bits", None, path, 1)
        spec.n_motion = _int_field(obj, "n_motion", None, path, 1)
        output_mode = obj.get("output_mode", spec.output_mode)
        _require(
            output_mode in OUTPUT_MODES, f"{path}.output_mode", f"must be one of {OUTPUT_MODES}"
        )
        spec.output_mode = output_mode
    elif kind == "map":
        spec.state_cap = _int_field(obj, "state_cap", None, path, 1)

    name = obj.get("name")
    if name is None:
        name = obj.get("kind") if obj.get("kind") in _DETECTOR_ALIASES else kind
        if kind == "mcmc" and name == "mcmc":
            name = f"mcmc-{spec.init}"
    _require(isinstance(name, str) and name != "", f"{path}.name", "must be a non-empty string")
    spec.name = name
    return spec


def parse_config(text: str) -> ExperimentConfig:
    """Parse and validate a JSON experiment config."""
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"invalid JSON: {exc}") from None
    _require(isinstance(raw, dict), "config", "top level must be an object")
    _check_keys(
        raw,
        {
            "experiment",
            "n",
            "m",
            "channel",
            "ebn0_db",
            "detectors",
            "realizations",
            "master_seed",
            "output_dir",
            "ia_grid",
            "n_iter_sweep",
        },
        "config",
    )

    experiment = raw.get("experiment")
    _require(experiment is not None, "config.experiment", "missing required key")
    _require(
        experiment in EXPERIMENTS, "config.experiment", f"must be one of {EXPERIMENTS}"
    )
    n = _int_field(raw, "n", None, "config", 1)
    _require(n is not None, "config.n", "missing required key")
    m = raw.get("m")
    _require(m is not None, "config.m", "missing required key")
    _require(m in QAM_ORDERS, "config.m", f"must be one of {QAM_ORDERS}")

    dets_raw = raw.get("detectors")
    _require(
        isinstance(dets_raw, list) and len(dets_raw) > 0,
        "config.detectors",
        "must be a non-empty list",
    )
    detectors = [
        _parse_detector(obj, f"config.detectors[{i}]") for i, obj in enumerate(dets_raw)
    ]
    names = [d.name for d in detectors]
    _require(
        len(set(names)) == len(names),
        "config.detectors",
        "detector names must be unique (set 'name' to disambiguate)",
    )

    channel = _parse_channel(raw.get("channel", {}), "config.channel")
    ebn0_db = _number_list(raw, "ebn0_db", DEFAULT_EBN0_DB, "config")
    realizations = _int_field(raw, "realizations", DEFAULT_REALIZATIONS, "config", 1)
    master_seed = _int_field(raw, "master_seed", DEFAULT_MASTER_SEED, "config", 0)
    output_dir = raw.get("output_dir", DEFAULT_OUTPUT_DIR)
    _require(
        isinstance(output_dir, str) and output_dir != "",
        "config.output_dir",
        "must be a non-empty string",
    )
    ia_grid = _number_list(raw, "ia_grid", DEFAULT_IA_GRID, "config")
    for i, v in enumerate(ia_grid):
        _require(0.0 <= v <= 1.0, f"config.ia_grid[{i}]", "must lie in [0, 1]")
    sweep_raw = raw.get("n_iter_sweep", DEFAULT_N_ITER_SWEEP)
    _require(
        isinstance(sweep_raw, list) and len(sweep_raw) > 0,
        "config.n_iter_sweep",
        "must be a non-empty list",
    )
    n_iter_sweep = []
    for i, v in enumerate(sweep_raw):
        _require(
            isinstance(v, int) and not isinstance(v, bool) and v >= 1,
            f"config.n_iter_sweep[{i}]",
            "must be an integer >= 1",
        )
        n_iter_sweep.append(v)

    return ExperimentConfig(
        experiment=experiment,
        n=n,
        m=m,
        detectors=detectors,
        channel=channel,
        ebn0_db=ebn0_db,
        realizations=realizations,
        master_seed=master_seed,
        output_dir=output_dir,
        ia_grid=ia_grid,
        n_iter_sweep=n_iter_sweep,
    )


def load_config(path: str) -> ExperimentConfig:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_config(fh.read())
