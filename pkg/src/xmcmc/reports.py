"""Delimited result emission: fixed schemas, atomic writes, stable floats.

Floats are written with 9 significant digits ('%.9g'), which round-trips
through float() back to the same 9-digit representation. Files are
written to a temp file in the target directory and renamed into place.
"""

from __future__ import annotations

import csv
import os
import tempfile
from collections.abc import Iterable, Sequence

from .detect.types import GibbsTrace

BER_HEADER = ["detector", "ebn0_db", "realizations", "bits", "bit_errors", "ber"]
CONVERGENCE_HEADER = [
    "detector",
    "ebn0_db",
    "n_iter",
    "realizations",
    "bits",
    "bit_errors",
    "ber",
]
EXIT_HEADER = ["detector", "ebn0_db", "I_a", "I_e", "bits"]
TRACE_HEADER = ["sampler", "iteration", "k", "p_gibbs", "determinism", "state_error", "forced_flip"]


def format_value(value) -> str:
    if isinstance(value, float):
        return format(value, ".9g")
    return str(value)


def write_csv_atomic(path: str, header: Sequence[str], rows: Iterable[Sequence]) -> None:
    directory = os.path.dirname(os.path.abspath(path))
    os.makedirs(directory, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=directory, suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(header)
            for row in rows:
                writer.writerow([format_value(v) for v in row])
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def write_ber_csv(path: str, rows: Iterable[Sequence]) -> None:
    write_csv_atomic(path, BER_HEADER, rows)


def write_convergence_csv(path: str, rows: Iterable[Sequence]) -> None:
    write_csv_atomic(path, CONVERGENCE_HEADER, rows)


def write_exit_csv(path: str, rows: Iterable[Sequence]) -> None:
    write_csv_atomic(path, EXIT_HEADER, rows)


def trace_rows(trace: GibbsTrace):
    for i in range(len(trace)):
        yield (
            int(trace.sampler[i]),
            int(trace.iteration[i]),
            int(trace.k[i]),
            float(trace.p_gibbs[i]),
            float(trace.determinism[i]),
            int(trace.state_error[i]),
            int(trace.forced_flip[i]),
        )


def write_trace_csv(path: str, trace: GibbsTrace) -> None:
    write_csv_atomic(path, TRACE_HEADER, trace_rows(trace))


def read_csv(path: str) -> tuple[list[str], list[list[str]]]:
    with open(path, "r", newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        return header, [row for row in reader]
