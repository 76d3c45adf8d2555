"""Experiment driver: seeding, worker pool, aggregation, reports.

Seeding scheme
--------------
Every random draw comes from a generator derived from the master seed
plus an index path, so results do not depend on worker scheduling:

* scenario rng  (master, ebn0_idx, realization)            -> H, tx bits,
  noise, then synthetic priors in grid order (exit runs only)
* detector rng  (master, ebn0_idx, det_idx, realization)   -> sampling
  (plus a trailing ia_idx for exit runs)

All detectors at one (ebn0, realization) therefore see the *same*
channel, bits and noise, while samplers never share a stream.

Determinism across thread counts
--------------------------------
Work is split into fixed-size realization chunks independent of the
thread count, and partial sums are reduced in chunk order, so float
accumulation is identical for 1 worker and for many. CSV output is
byte-identical across runs and across --threads values.
"""

from __future__ import annotations

import os
from concurrent.futures import ProcessPoolExecutor

import numpy as np

from .channels import make_realization
from .config import DetectorSpec, ExperimentConfig
from .detect import (
    DEFAULT_STATE_CAP,
    DetectorInput,
    DetectorOutput,
    McmcDetector,
    XmcmcDetector,
    maxlog_map_detect,
    mmse_detect,
)
from .metrics import (
    mutual_information_terms,
    pooled_mutual_information,
    synthetic_prior_llrs,
    trace_matrices,
)
from .qam import build_constellation
from .reports import (
    write_ber_csv,
    write_convergence_csv,
    write_exit_csv,
    write_trace_csv,
)
from .seeding import make_rng

# realizations per work unit; fixed so the reduction order (and thus the
# float sums) cannot depend on the thread count
CHUNK_REALIZATIONS = 8

SAMPLING_KINDS = ("mcmc", "xmcmc")


class ExperimentError(RuntimeError):
    """An experiment that cannot run as configured (infeasible, not invalid)."""


def detect_once(
    spec: DetectorSpec,
    inp: DetectorInput,
    rng: np.random.Generator,
    n_iter: int | None = None,
    trace: bool = False,
) -> DetectorOutput:
    """Run one detector described by a config entry on one observation."""
    if spec.kind == "map":
        cap = DEFAULT_STATE_CAP if spec.state_cap is None else spec.state_cap
        return maxlog_map_detect(inp, state_cap=cap)
    if spec.kind == "mmse":
        return mmse_detect(inp)
    iters = spec.n_iter if n_iter is None else n_iter
    if spec.kind == "mcmc":
        det = McmcDetector(n_gibbs=spec.n_gibbs, n_iter=iters, init=spec.init)
        return det.detect(inp, rng, trace=trace)
    det = XmcmcDetector(
        n_gibbs=spec.n_gibbs,
        n_iter=iters,
        mode=spec.mode,
        pseudo=spec.pseudo,
        conditioning=spec.conditioning,
        lut_bits=spec.lut_bits,
        n_motion=spec.n_motion,
        output_mode=spec.output_mode,
    )
    return det.detect(inp, rng, trace=trace)


def preflight(cfg: ExperimentConfig) -> None:
    """Reject configurations that cannot run before any work starts."""
    total = cfg.m ** cfg.n
    for spec in cfg.detectors:
        if spec.kind != "map":
            continue
        cap = DEFAULT_STATE_CAP if spec.state_cap is None else spec.state_cap
        if total > cap:
            raise ExperimentError(
                f"detector {spec.name!r}: exhaustive search needs {total} states "
                f"but the cap is {cap}; raise state_cap to allow it"
            )
    if cfg.experiment == "trace" and not any(
        spec.kind in SAMPLING_KINDS for spec in cfg.detectors
    ):
        raise ExperimentError(
            "trace experiment needs at least one sampling detector (mcmc or xmcmc)"
        )


def _scenario_input(cfg: ExperimentConfig, seed: int, ebn0_idx: int, r: int):
    rng = make_rng(seed, ebn0_idx, r)
    scen = make_realization(cfg.n, cfg.m, cfg.ebn0_db[ebn0_idx], cfg.channel, rng)
    inp = DetectorInput(
        y=scen.y,
        h=scen.h,
        sigma_n2=scen.sigma_n2,
        constellation=build_constellation(cfg.m),
        tx_bits=scen.tx_bits,
    )
    return scen, inp, rng


def _ber_unit(cfg: ExperimentConfig, seed: int, ebn0_idx: int, r_start: int, r_stop: int):
    """Per-chunk (det_idx, ebn0_idx) -> [bits, errors]."""
    acc: dict[tuple, list] = {}
    for r in range(r_start, r_stop):
        scen, inp, _ = _scenario_input(cfg, seed, ebn0_idx, r)
        for d_idx, spec in enumerate(cfg.detectors):
            out = detect_once(spec, inp, make_rng(seed, ebn0_idx, d_idx, r))
            errs = int(np.count_nonzero(out.hard_bits != scen.tx_bits))
            cell = acc.setdefault((d_idx, ebn0_idx), [0, 0])
            cell[0] += scen.tx_bits.size
            cell[1] += errs
    return acc


def _convergence_unit(
    cfg: ExperimentConfig, seed: int, ebn0_idx: int, r_start: int, r_stop: int
):
    """Per-chunk (det_idx, ebn0_idx, iter_idx) -> [bits, errors].

    Non-sampling detectors are run once per realization and their counts
    repeated along the sweep (reference lines). Sampling detectors reuse
    one seed per realization, so a longer run extends the shorter run's
    trajectories instead of resampling them.
    """
    acc: dict[tuple, list] = {}

    def bump(key, n_bits, errs):
        cell = acc.setdefault(key, [0, 0])
        cell[0] += n_bits
        cell[1] += errs

    for r in range(r_start, r_stop):
        scen, inp, _ = _scenario_input(cfg, seed, ebn0_idx, r)
        k = scen.tx_bits.size
        for d_idx, spec in enumerate(cfg.detectors):
            if spec.kind not in SAMPLING_KINDS:
                out = detect_once(spec, inp, make_rng(seed, ebn0_idx, d_idx, r))
                errs = int(np.count_nonzero(out.hard_bits != scen.tx_bits))
                for it_idx in range(len(cfg.n_iter_sweep)):
                    bump((d_idx, ebn0_idx, it_idx), k, errs)
                continue
            for it_idx, iters in enumerate(cfg.n_iter_sweep):
                rng = make_rng(seed, ebn0_idx, d_idx, r)
                out = detect_once(spec, inp, rng, n_iter=iters)
                errs = int(np.count_nonzero(out.hard_bits != scen.tx_bits))
                bump((d_idx, ebn0_idx, it_idx), k, errs)
    return acc


def _exit_unit(cfg: ExperimentConfig, seed: int, ebn0_idx: int, r_start: int, r_stop: int):
    """Per-chunk (det_idx, ebn0_idx, ia_idx) -> [loss_sum, bits]."""
    acc: dict[tuple, list] = {}
    for r in range(r_start, r_stop):
        scen, inp, scen_rng = _scenario_input(cfg, seed, ebn0_idx, r)
        priors = [
            synthetic_prior_llrs(ia, scen.tx_bits, scen_rng) for ia in cfg.ia_grid
        ]
        for ia_idx, lam_a in enumerate(priors):
            inp_ia = DetectorInput(
                y=scen.y,
                h=scen.h,
                sigma_n2=scen.sigma_n2,
                constellation=inp.constellation,
                lambda_a=lam_a,
                tx_bits=scen.tx_bits,
            )
            for d_idx, spec in enumerate(cfg.detectors):
                rng = make_rng(seed, ebn0_idx, d_idx, r, ia_idx)
                out = detect_once(spec, inp_ia, rng)
                loss, n_bits = mutual_information_terms(out.lambda_e, scen.tx_bits)
                cell = acc.setdefault((d_idx, ebn0_idx, ia_idx), [0.0, 0])
                cell[0] += loss
                cell[1] += n_bits
    return acc


_UNIT_FUNCS = {"ber": _ber_unit, "convergence": _convergence_unit, "exit": _exit_unit}


def _merge(total: dict, part: dict) -> None:
    for key, cell in part.items():
        slot = total.setdefault(key, [0] * len(cell))
        for i, v in enumerate(cell):
            slot[i] += v


def _pooled_accumulate(cfg: ExperimentConfig, seed: int, threads: int) -> dict:
    unit = _UNIT_FUNCS[cfg.experiment]
    tasks = [
        (ebn0_idx, start, min(start + CHUNK_REALIZATIONS, cfg.realizations))
        for ebn0_idx in range(len(cfg.ebn0_db))
        for start in range(0, cfg.realizations, CHUNK_REALIZATIONS)
    ]
    total: dict = {}
    if threads <= 1:
        for ebn0_idx, start, stop in tasks:
            _merge(total, unit(cfg, seed, ebn0_idx, start, stop))
        return total
    with ProcessPoolExecutor(max_workers=threads) as pool:
        futures = [
            pool.submit(unit, cfg, seed, ebn0_idx, start, stop)
            for ebn0_idx, start, stop in tasks
        ]
        # reduce in submission order, not completion order
        for fut in futures:
            _merge(total, fut.result())
    return total


def _ber_rows(cfg: ExperimentConfig, total: dict):
    rows = []
    for d_idx, spec in enumerate(cfg.detectors):
        for ebn0_idx, ebn0 in enumerate(cfg.ebn0_db):
            n_bits, errs = total[(d_idx, ebn0_idx)]
            rows.append(
                (spec.name, float(ebn0), cfg.realizations, n_bits, errs, errs / n_bits)
            )
    return rows


def _convergence_rows(cfg: ExperimentConfig, total: dict):
    rows = []
    for d_idx, spec in enumerate(cfg.detectors):
        for ebn0_idx, ebn0 in enumerate(cfg.ebn0_db):
            for it_idx, iters in enumerate(cfg.n_iter_sweep):
                n_bits, errs = total[(d_idx, ebn0_idx, it_idx)]
                rows.append(
                    (
                        spec.name,
                        float(ebn0),
                        iters,
                        cfg.realizations,
                        n_bits,
                        errs,
                        errs / n_bits,
                    )
                )
    return rows


def _exit_rows(cfg: ExperimentConfig, total: dict):
    rows = []
    for d_idx, spec in enumerate(cfg.detectors):
        for ebn0_idx, ebn0 in enumerate(cfg.ebn0_db):
            for ia_idx, ia in enumerate(cfg.ia_grid):
                loss, n_bits = total[(d_idx, ebn0_idx, ia_idx)]
                i_e = pooled_mutual_information(loss, n_bits)
                rows.append((spec.name, float(ebn0), float(ia), i_e, n_bits))
    return rows


def _run_trace(cfg: ExperimentConfig, seed: int, out_dir: str, figures: bool):
    """Trace the first realization for every sampling detector and SNR."""
    csv_paths, fig_paths, summary_rows = [], [], []
    for ebn0_idx, ebn0 in enumerate(cfg.ebn0_db):
        scen, inp, _ = _scenario_input(cfg, seed, ebn0_idx, 0)
        for d_idx, spec in enumerate(cfg.detectors):
            if spec.kind not in SAMPLING_KINDS:
                continue
            rng = make_rng(seed, ebn0_idx, d_idx, 0)
            out = detect_once(spec, inp, rng, trace=True)
            tag = f"{spec.name}_{ebn0:g}dB"
            path = os.path.join(out_dir, f"trace_{tag}.csv")
            write_trace_csv(path, out.trace)
            csv_paths.append(path)
            mats = trace_matrices(out.trace)
            mean_det = float(np.nanmean(mats["determinism"]))
            final_err = float(mats["state_error_mean"][-1].mean())
            summary_rows.append((spec.name, float(ebn0), mean_det, final_err))
            if figures:
                from .plots import plot_trace

                fig_path = os.path.join(out_dir, f"trace_{tag}.png")
                plot_trace(
                    fig_path,
                    mats["determinism"],
                    np.where(mats["state_error"] < 0, np.nan, mats["state_error"]),
                    f"{spec.name} @ {ebn0:g} dB",
                )
                fig_paths.append(fig_path)
    return csv_paths, fig_paths, summary_rows


def _print_summary(cfg: ExperimentConfig, rows, header) -> None:
    widths = [max(len(str(h)), 12) for h in header]
    print(
        f"experiment={cfg.experiment} n={cfg.n} m={cfg.m} "
        f"channel={cfg.channel.kind} realizations={cfg.realizations}"
    )
    print("  ".join(str(h).ljust(w) for h, w in zip(header, widths)))
    for row in rows:
        cells = [format(v, ".6g") if isinstance(v, float) else str(v) for v in row]
        print("  ".join(c.ljust(w) for c, w in zip(cells, widths)))


def run_experiment(
    cfg: ExperimentConfig,
    out_dir: str | None = None,
    threads: int = 1,
    master_seed: int | None = None,
    figures: bool = True,
    summary: bool = True,
) -> dict:
    """Run one configured experiment end to end.

    Returns {"csv": [...], "figures": [...], "rows": [...]} with the
    paths written and the aggregated rows (CSV order).
    """
    if threads < 1:
        raise ValueError("threads must be >= 1")
    preflight(cfg)
    seed = cfg.master_seed if master_seed is None else int(master_seed)
    out_dir = cfg.output_dir if out_dir is None else out_dir
    os.makedirs(out_dir, exist_ok=True)

    if cfg.experiment == "trace":
        csv_paths, fig_paths, summary_rows = _run_trace(cfg, seed, out_dir, figures)
        if summary:
            _print_summary(
                cfg, summary_rows, ["detector", "ebn0_db", "mean_determinism", "final_error"]
            )
        return {"csv": csv_paths, "figures": fig_paths, "rows": summary_rows}

    total = _pooled_accumulate(cfg, seed, threads)
    fig_paths: list[str] = []
    if cfg.experiment == "ber":
        rows = _ber_rows(cfg, total)
        path = os.path.join(out_dir, "ber.csv")
        write_ber_csv(path, rows)
        header = ["detector", "ebn0_db", "realizations", "bits", "bit_errors", "ber"]
        if figures:
            from .plots import plot_ber

            fig_path = os.path.join(out_dir, "ber.png")
            plot_ber(fig_path, rows)
            fig_paths.append(fig_path)
    elif cfg.experiment == "convergence":
        rows = _convergence_rows(cfg, total)
        path = os.path.join(out_dir, "convergence.csv")
        write_convergence_csv(path, rows)
        header = [
            "detector",
            "ebn0_db",
            "n_iter",
            "realizations",
            "bits",
            "bit_errors",
            "ber",
        ]
        if figures:
            from .plots import plot_convergence

            fig_path = os.path.join(out_dir, "convergence.png")
            plot_convergence(fig_path, rows)
            fig_paths.append(fig_path)
    else:
        rows = _exit_rows(cfg, total)
        path = os.path.join(out_dir, "exit.csv")
        write_exit_csv(path, rows)
        header = ["detector", "ebn0_db", "I_a", "I_e", "bits"]
        if figures:
            from .plots import plot_exit

            fig_path = os.path.join(out_dir, "exit.png")
            plot_exit(fig_path, rows)
            fig_paths.append(fig_path)
    if summary:
        _print_summary(cfg, rows, header)
    return {"csv": [path], "figures": fig_paths, "rows": rows}
