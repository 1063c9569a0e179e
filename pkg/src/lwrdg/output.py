"""Run output: one CSV per road and output time, plus a JSON summary."""

from __future__ import annotations

import csv
import json
from pathlib import Path

from .dg import sample
from .network import RunResult

__all__ = ["time_label", "write_run"]


def time_label(t: float) -> str:
    return f"t{t:g}"


def write_run(result: RunResult, out_dir, per_cell: int | None = None) -> Path:
    """Write ``<out>/<road>/t<time>.csv`` for every snapshot and ``<out>/summary.json``."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    per_cell = per_cell or result.config.solver.samples_per_cell
    ids = result.state.net.ids
    for t, snap in sorted(result.snapshots.items()):
        for rid, st in zip(ids, snap.roads):
            d = out / rid
            d.mkdir(exist_ok=True)
            x, rho, avg = sample(st, per_cell)
            with open(d / f"{time_label(t)}.csv", "w", newline="") as fh:
                w = csv.writer(fh)
                w.writerow(["x", "rho_sampled", "cell_avg"])
                for row in zip(x, rho, avg):
                    w.writerow([repr(float(v)) for v in row])
    summary = result.summary()
    summary["dt_history"] = list(result.dts)
    (out / "summary.json").write_text(json.dumps(summary, indent=2) + "\n")
    return out
