"""CSV serialization of run traces.

Floats are written in exponent notation with 17 significant digits, which
round-trips IEEE-754 doubles, so re-running a seeded benchmark reproduces
the files byte for byte.
"""

from __future__ import annotations

import numpy as np

from .solvers import IterationRecord, RunTrace

CSV_HEADER = "j,experiments_cum,cost_measured,cost_true,epsilon,tau,reset"


def _fmt(x: float | None) -> str:
    return "" if x is None else f"{x:.16e}"


def trace_to_csv(trace: RunTrace) -> str:
    lines = [CSV_HEADER]
    for r in trace.records:
        lines.append(",".join([
            str(r.j),
            str(r.experiments_cum),
            _fmt(r.cost_measured),
            _fmt(r.cost_true),
            _fmt(r.epsilon),
            _fmt(r.tau),
            "1" if r.reset else "0",
        ]))
    return "\n".join(lines) + "\n"


def write_trace(trace: RunTrace, path) -> None:
    with open(path, "w", newline="\n") as fh:
        fh.write(trace_to_csv(trace))


def read_trace_csv(path) -> list[IterationRecord]:
    records = []
    with open(path) as fh:
        header = fh.readline().strip()
        if header != CSV_HEADER:
            raise ValueError(f"{path}: unexpected header {header!r}")
        for line in fh:
            line = line.strip()
            if not line:
                continue
            j, exps, cm, ct, eps, tau, reset = line.split(",")
            records.append(IterationRecord(
                j=int(j),
                experiments_cum=int(exps),
                cost_measured=float(cm),
                cost_true=float(ct),
                epsilon=float(eps) if eps else None,
                tau=float(tau) if tau else None,
                reset=reset == "1",
            ))
    if not records:
        raise ValueError(f"{path}: no data rows")
    return records


def records_as_arrays(records: list[IterationRecord]) -> dict[str, np.ndarray]:
    return {
        "experiments_cum": np.array([r.experiments_cum for r in records], dtype=float),
        "cost_measured": np.array([r.cost_measured for r in records]),
        "cost_true": np.array([r.cost_true for r in records]),
    }
