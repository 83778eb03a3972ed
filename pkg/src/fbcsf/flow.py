"""Curve shortening flow in the unit disc with the free boundary condition.

Nodes move by the discrete curvature vector with an explicit Heun step; the
two endpoints are re-attached to the unit circle so the tangent there is
radial, and the polyline is resampled to uniform arc length after each step.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, replace
from functools import cached_property

import numpy as np

from . import _kernels
from .curve import CurveGeometry, DiscreteCurve, geometry, resample

log = logging.getLogger(__name__)

__all__ = [
    "FlowConfig",
    "FlowTrajectory",
    "StepRejected",
    "ExtinctionEstimateError",
    "step",
    "run",
    "evolve",
    "extinction_time",
    "orthogonality_residual",
]

STOP_REASONS = {
    _kernels.STOP_THETA: "theta_bar",
    _kernels.STOP_LENGTH: "length",
    _kernels.STOP_MAX_STEPS: "max_steps",
    _kernels.STOP_NONFINITE: "nonfinite",
}

# relative slack on the CFL test so dt = cfl*h^2 computed elsewhere is accepted
_CFL_SLACK = 1e-12
_CONVEXITY_TOL = 1e-6


class StepRejected(ValueError):
    """The requested step exceeds the explicit stability bound."""

    def __init__(self, dt: float, admissible_dt: float):
        super().__init__(f"dt={dt!r} exceeds admissible {admissible_dt!r}")
        self.dt = dt
        self.admissible_dt = admissible_dt


class ExtinctionEstimateError(ValueError):
    """The trajectory cannot support an extinction-time extrapolation."""


@dataclass(frozen=True)
class FlowConfig:
    """Integrator settings.

    ``n_nodes`` counts segments, so curves carry n_nodes + 1 points.
    Frames are stored whenever time advances by ``frame_dt`` or log length
    drops by ``frame_dlog_length``, whichever comes first; the second rule
    keeps the fast final collapse resolved.
    """

    n_nodes: int = 256
    cfl: float = 0.4
    stop_theta_bar: float = 1.45
    stop_length: float = 1e-2
    max_steps: int = 50_000_000
    boundary_order: int = 2
    frame_dt: float = 2e-3
    frame_dlog_length: float = 2e-3

    def __post_init__(self):
        if self.n_nodes < 8:
            raise ValueError(f"n_nodes must be at least 8, got {self.n_nodes}")
        if not 0.0 < self.cfl <= 0.5:
            raise ValueError(f"cfl must lie in (0, 0.5], got {self.cfl}")
        if not 0.0 < self.stop_theta_bar < 0.5 * math.pi:
            raise ValueError(f"stop_theta_bar must lie in (0, pi/2), got {self.stop_theta_bar}")
        if not self.stop_length > 0.0:
            raise ValueError("stop_length must be positive")
        if self.max_steps < 1:
            raise ValueError("max_steps must be positive")
        if self.boundary_order not in (1, 2):
            raise ValueError(f"boundary_order must be 1 or 2, got {self.boundary_order}")
        if not (self.frame_dt > 0.0 and self.frame_dlog_length > 0.0):
            raise ValueError("frame strides must be positive")

    def to_dict(self) -> dict:
        return dict(self.__dict__)

    @classmethod
    def from_dict(cls, d: dict) -> "FlowConfig":
        return cls(**d)


@dataclass(frozen=True, eq=False)
class FlowTrajectory:
    times: np.ndarray
    curves: tuple
    config: FlowConfig
    stop_reason: str = "theta_bar"
    steps: int = 0
    extinction_estimate: float = math.nan
    flags: tuple = ()
    time_shift: float = 0.0

    def __post_init__(self):
        times = np.array(self.times, dtype=float)
        times.setflags(write=False)
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "curves", tuple(self.curves))
        if len(times) != len(self.curves):
            raise ValueError("one curve per time is required")
        if len(times) > 1 and not np.all(np.diff(times) > 0):
            raise ValueError("times must be strictly increasing")

    def __len__(self):
        return len(self.times)

    @cached_property
    def diagnostics(self) -> tuple[CurveGeometry, ...]:
        return tuple(geometry(c) for c in self.curves)

    def series(self, name: str) -> np.ndarray:
        """Per-frame scalar from the geometry, e.g. 'theta_bar' or 'kappa_max'."""
        return np.array([getattr(g, name) for g in self.diagnostics])

    @property
    def t0(self) -> float:
        return float(self.times[0])

    def shifted(self, dt: float) -> "FlowTrajectory":
        """Same frames with every time (and the extinction estimate) moved by dt."""
        new = replace(
            self,
            times=self.times + dt,
            extinction_estimate=self.extinction_estimate + dt,
            time_shift=self.time_shift + dt,
        )
        if "diagnostics" in self.__dict__:
            new.__dict__["diagnostics"] = self.__dict__["diagnostics"]
        return new

    def normalized(self) -> "FlowTrajectory":
        """Shifted so the estimated extinction time is 0."""
        if not math.isfinite(self.extinction_estimate):
            raise ExtinctionEstimateError("trajectory has no extinction estimate")
        return self.shifted(-self.extinction_estimate)

    def covers(self, t: float) -> bool:
        return bool(self.times[0] <= t <= self.times[-1])

    def curve_at(self, t: float) -> np.ndarray:
        """Nodes at time t, linear in time between the bracketing frames."""
        if not self.covers(t):
            raise ValueError(f"t={t} outside [{self.times[0]}, {self.times[-1]}]")
        k = int(np.searchsorted(self.times, t, side="right")) - 1
        k = min(k, len(self.times) - 2)
        if len(self.times) == 1:
            return self.curves[0].nodes.copy()
        t0, t1 = self.times[k], self.times[k + 1]
        w = (t - t0) / (t1 - t0)
        p0 = self.curves[k].nodes
        p1 = self.curves[k + 1].nodes
        if p0.shape != p1.shape:
            p1 = resample(self.curves[k + 1], self.curves[k].n).nodes
        return (1.0 - w) * p0 + w * p1


def _admissible_dt(c: DiscreteCurve, cfg: FlowConfig) -> float:
    return cfg.cfl * _kernels.min_segment(c.nodes) ** 2


def orthogonality_residual(c: DiscreteCurve) -> float:
    """max over both endpoints of |<nu, gamma>|, using one-sided quadratic tangents."""
    g = geometry(c)
    p = c.nodes
    res = 0.0
    for k in (0, -1):
        th = g.turning[k]
        nu = np.array([-math.sin(th), math.cos(th)])
        res = max(res, abs(float(nu @ p[k])))
    return res


def _convexity_ok(c: DiscreteCurve) -> bool:
    g = geometry(c)
    return g.kappa_min >= -_CONVEXITY_TOL * max(g.kappa_max, 0.0)


def step(c: DiscreteCurve, dt: float, cfg: FlowConfig) -> DiscreteCurve:
    """One Heun step of size dt, endpoints re-attached, then uniform resampling.

    Raises StepRejected when dt exceeds cfl * h_min^2. A result that has lost
    convexity is returned with ``convexity_warning`` set.
    """
    if not dt > 0.0:
        raise ValueError(f"dt must be positive, got {dt}")
    admissible = _admissible_dt(c, cfg)
    if dt > admissible * (1.0 + _CFL_SLACK):
        raise StepRejected(dt, admissible)
    X = np.array(c.nodes, dtype=np.float64)
    K1 = np.empty_like(X)
    K2 = np.empty_like(X)
    Y = np.empty_like(X)
    s = np.empty(len(X))
    _kernels.heun_step(X, dt, cfg.boundary_order, K1, K2, Y, s)
    out = DiscreteCurve(X, strict=False)
    if not _convexity_ok(out):
        out = DiscreteCurve(X, strict=False, convexity_warning=True)
    return out


def run(initial: DiscreteCurve, t0: float, cfg: FlowConfig) -> FlowTrajectory:
    """Integrate from ``initial`` at time t0 until a stop condition.

    The extinction estimate is filled when the run ends near extinction and
    left as NaN otherwise (with a flag).
    """
    if initial.n != cfg.n_nodes:
        log.info("resampling initial curve from %d to %d segments", initial.n, cfg.n_nodes)
        initial = resample(initial, cfg.n_nodes)
    X = np.array(initial.nodes, dtype=np.float64)
    t = float(t0)
    times = [t]
    curves = [initial]
    flags: list[str] = []
    steps = 0
    reason = "max_steps"
    L = _length(X)
    while True:
        t_next = t + cfg.frame_dt
        L_next = L * math.exp(-cfg.frame_dlog_length)
        t, k, code = _kernels.advance(
            X,
            t,
            cfg.cfl,
            cfg.boundary_order,
            t_next,
            L_next,
            cfg.stop_theta_bar,
            cfg.stop_length,
            cfg.max_steps - steps,
        )
        steps += k
        if code == _kernels.STOP_NONFINITE:
            flags.append("nonfinite")
            reason = "nonfinite"
            break
        if k == 0:
            # budget already spent: nothing new to record
            reason = STOP_REASONS[code]
            break
        L = _length(X)
        c = DiscreteCurve(X, strict=False)
        times.append(t)
        curves.append(c)
        if code != _kernels.STOP_FRAME:
            reason = STOP_REASONS[code]
            break
    if reason == "max_steps":
        flags.append("not_converged")
    traj = FlowTrajectory(
        times=np.array(times), curves=curves, config=cfg, stop_reason=reason, steps=steps,
    )
    bad = [i for i, c in enumerate(curves) if not _convexity_ok(c)]
    if bad:
        flags.append(f"convexity_lost_at_frame_{bad[0]}")
    try:
        t_ext = extinction_time(traj)
    except ExtinctionEstimateError as exc:
        flags.append("no_extinction_estimate")
        log.warning("no extinction estimate: %s", exc)
        t_ext = math.nan
    return replace(traj, extinction_estimate=t_ext, flags=tuple(flags))


def evolve(c: DiscreteCurve, t0: float, t1: float, cfg: FlowConfig) -> DiscreteCurve:
    """The curve at exactly time t1, stepping from c at t0 (last step shortened).

    Raises RuntimeError if a stop condition intervenes first.
    """
    if not t1 > t0:
        raise ValueError("t1 must exceed t0")
    X = np.array(c.nodes, dtype=np.float64)
    t, _, code = _kernels.advance(
        X, float(t0), cfg.cfl, cfg.boundary_order, float(t1), -1.0,
        cfg.stop_theta_bar, cfg.stop_length, cfg.max_steps, True,
    )
    if code != _kernels.STOP_FRAME or t != t1:
        raise RuntimeError(f"stopped early at t={t} ({STOP_REASONS.get(code, code)})")
    return DiscreteCurve(X, strict=False)


def _length(X: np.ndarray) -> float:
    return float(np.sum(np.hypot(*np.diff(X, axis=0).T)))


def extinction_time(traj: FlowTrajectory) -> float:
    """Extrapolate the extinction time from a straight-line fit of L^2 against t.

    Uses the last 10% of frames. The run must have ended near extinction:
    final length below 5 * stop_length, or final right-endpoint angle at the
    stopping angle.
    """
    cfg = traj.config
    if len(traj) < 2:
        raise ExtinctionEstimateError("need at least two frames")
    last = traj.curves[-1]
    L_end = _length(last.nodes)
    th_end = math.atan2(last.nodes[-1, 1], last.nodes[-1, 0])
    if not (L_end < 5.0 * cfg.stop_length or th_end >= cfg.stop_theta_bar):
        raise ExtinctionEstimateError(
            f"run ended far from extinction (length {L_end:.4g}, angle {th_end:.4g})"
        )
    m = max(int(math.ceil(0.1 * len(traj))), 5)
    if m > len(traj):
        raise ExtinctionEstimateError(f"only {len(traj)} frames, need at least 5")
    t = traj.times[-m:]
    L2 = np.array([_length(c.nodes) ** 2 for c in traj.curves[-m:]])
    slope, icpt = np.polyfit(t, L2, 1)
    if not slope < 0.0:
        raise ExtinctionEstimateError("length is not decreasing over the fit window")
    return float(-icpt / slope)
