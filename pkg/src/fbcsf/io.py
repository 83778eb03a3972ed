"""Trajectory directories: meta.json, frames.csv and diag.csv.

Floats are written with 17 significant digits so a reload reproduces every
node bit for bit.
"""

from __future__ import annotations

import json
import math
from pathlib import Path

import numpy as np

from .curve import DiscreteCurve, symmetry_defect
from .flow import FlowConfig, FlowTrajectory, orthogonality_residual

FRAMES_HEADER = "t,i,x,y,kappa"
DIAG_COLUMNS = (
    "t",
    "theta_bar",
    "kappa_min",
    "kappa_max",
    "y_min",
    "length",
    "area",
    "symmetry_defect",
    "orth_residual",
)


def _clean(obj):
    # JSON has no NaN/inf; write them as null
    if isinstance(obj, float):
        return obj if math.isfinite(obj) else None
    if isinstance(obj, dict):
        return {k: _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.generic):
        return _clean(obj.item())
    if isinstance(obj, np.ndarray):
        return _clean(obj.tolist())
    return obj


def dump_json(obj, path) -> None:
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w") as fh:
        json.dump(_clean(obj), fh, indent=2, sort_keys=True, allow_nan=False)
        fh.write("\n")


def load_json(path):
    with open(path) as fh:
        return json.load(fh)


def write_trajectory(traj: FlowTrajectory, directory, extra: dict | None = None) -> Path:
    d = Path(directory)
    d.mkdir(parents=True, exist_ok=True)
    meta = {
        "config": traj.config.to_dict(),
        "t0": traj.t0,
        "extinction_estimate": traj.extinction_estimate,
        "stop_reason": traj.stop_reason,
        "steps": traj.steps,
        "flags": list(traj.flags),
        "time_shift": traj.time_shift,
        "n_frames": len(traj),
    }
    if extra:
        meta.update(extra)
    dump_json(meta, d / "meta.json")

    blocks = []
    for t, c, g in zip(traj.times, traj.curves, traj.diagnostics):
        m = c.n + 1
        blocks.append(np.column_stack([np.full(m, t), np.arange(m), c.x, c.y, g.kappa]))
    np.savetxt(
        d / "frames.csv",
        np.vstack(blocks),
        fmt=["%.17g", "%d", "%.17g", "%.17g", "%.17g"],
        delimiter=",",
        header=FRAMES_HEADER,
        comments="",
    )

    rows = [
        [t, g.theta_bar, g.kappa_min, g.kappa_max, g.y_min, g.length, g.area,
         symmetry_defect(c), orthogonality_residual(c)]
        for t, c, g in zip(traj.times, traj.curves, traj.diagnostics)
    ]
    np.savetxt(
        d / "diag.csv", np.array(rows), fmt="%.17g", delimiter=",",
        header=",".join(DIAG_COLUMNS), comments="",
    )
    return d


def read_meta(directory) -> dict:
    return load_json(Path(directory) / "meta.json")


def read_trajectory(directory) -> FlowTrajectory:
    d = Path(directory)
    meta = read_meta(d)
    data = np.loadtxt(d / "frames.csv", delimiter=",", skiprows=1, ndmin=2)
    t = data[:, 0]
    starts = np.flatnonzero(np.r_[True, t[1:] != t[:-1]])
    ends = np.r_[starts[1:], len(t)]
    curves = [DiscreteCurve(data[a:b, 2:4], strict=False) for a, b in zip(starts, ends)]
    ext = meta.get("extinction_estimate")
    return FlowTrajectory(
        times=t[starts],
        curves=curves,
        config=FlowConfig.from_dict(meta["config"]),
        stop_reason=meta.get("stop_reason", ""),
        steps=int(meta.get("steps", 0)),
        extinction_estimate=math.nan if ext is None else float(ext),
        flags=tuple(meta.get("flags", ())),
        time_shift=float(meta.get("time_shift", 0.0)),
    )
