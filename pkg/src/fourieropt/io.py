"""CSV and JSON artifact writers.

Every CSV starts with a header row and writes floats with 17 significant
digits, so values parse back to the identical double.
"""

from __future__ import annotations

import csv
import json
import math
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .hybrid_integrator import Trajectory

__all__ = [
    "CONTROL_STRIDE",
    "control_samples",
    "fmt",
    "read_csv",
    "write_control_csv",
    "write_csv",
    "write_delta_matrix_csv",
    "write_events_csv",
    "write_json",
    "write_summary_csv",
    "write_trajectory_csv",
]

CONTROL_STRIDE = 0.01


def fmt(x) -> str:
    if isinstance(x, (bool, np.bool_)):
        return str(bool(x)).lower()
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if x is None:
        return ""
    x = float(x)
    if math.isnan(x):
        return ""
    return f"{x:.17g}"


def write_csv(path, header: Sequence[str], rows: Iterable[Sequence]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([v if isinstance(v, str) else fmt(v) for v in row])
    return path


def read_csv(path) -> list[dict]:
    with Path(path).open(newline="") as fh:
        return list(csv.DictReader(fh))


def write_trajectory_csv(path, traj: Trajectory, control) -> Path:
    u = [control.value(t) if hasattr(control, "value") else float(control(t)) for t in traj.t]
    rows = (
        (t, y[0], y[1], y[2], y[3], int(m), ui)
        for t, y, m, ui in zip(traj.t, traj.y, traj.modes, u)
    )
    return write_csv(path, ("tau", "theta", "theta_dot", "z", "z_dot", "mode", "u"), rows)


def write_events_csv(path, events) -> Path:
    return write_csv(path, ("tau", "from_mode", "to_mode"),
                     ((e.t, e.from_mode, e.to_mode) for e in events))


def control_samples(control, t0: float, tf: float, stride: float = CONTROL_STRIDE):
    n = int(round((tf - t0) / stride))
    t = t0 + stride * np.arange(n + 1)
    t[-1] = min(t[-1], tf)
    return t, np.asarray(control(t), dtype=float)


def write_control_csv(path, control, t0: float, tf: float,
                      stride: float = CONTROL_STRIDE) -> Path:
    t, u = control_samples(control, t0, tf, stride)
    return write_csv(path, ("tau", "u"), zip(t, u))


def write_summary_csv(path, summaries: dict[str, dict]) -> Path:
    """One row per (approach, K): mean distance, sample SD and percent change."""
    rows = []
    for approach, s in summaries.items():
        for r in s["rows"]:
            rows.append((approach, r["K"], r["n"], r["mean"], r["sd"], r["delta"]))
    return write_csv(path, ("approach", "K", "trials", "mean_distance", "sd",
                            "relative_change_percent"), rows)


def write_delta_matrix_csv(path, summary: dict) -> Path:
    """Per-trial relative change for every consecutive K pair."""
    header = ["K_from", "K_to"] + [f"trial_{t}" for t in summary["trials"]]
    ks = [r["K"] for r in summary["rows"]]
    rows = [[k0, k1, *vals] for k0, k1, vals in zip(ks, ks[1:], summary["delta_matrix"])]
    return write_csv(path, header, rows)


def _clean(obj):
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _clean(obj.tolist())
    if isinstance(obj, (np.floating, float)):
        x = float(obj)
        return x if math.isfinite(x) else None
    if isinstance(obj, np.integer):
        return int(obj)
    return obj


def write_json(path, obj) -> Path:
    """JSON with non-finite floats written as null."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(_clean(obj), indent=2) + "\n")
    return path
