"""Old-but-not-ancient flows from oval initial data and their backward asymptotics."""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import exact_forms as ef
from .curve import DiscreteCurve, diameter, hausdorff, sample_graph
from .diagnostics import CheckReport
from .flow import FlowConfig, FlowTrajectory, run

__all__ = [
    "AncientApproximation",
    "AsymptoticFit",
    "InsufficientDataError",
    "initial_curve",
    "construct",
    "family_cauchy",
    "family_distances",
    "fit_A",
    "fit_decay_exponent",
    "backwards_convergence_check",
    "start_time_bound",
]

FIT_THETA_MAX = 0.3


class InsufficientDataError(ValueError):
    """The trajectory has no frames in the requested fit window."""


@dataclass(frozen=True, eq=False)
class AncientApproximation:
    rho: float
    lambda_rho: float
    t_rho: float
    traj: FlowTrajectory  # shifted so extinction is at t = 0

    @property
    def t0(self) -> float:
        return self.traj.t0


@dataclass(frozen=True)
class AsymptoticFit:
    A: float
    window: tuple[float, float]
    profile_residual: float
    resolution: int

    def __post_init__(self):
        if not self.A > 0.0:
            raise ValueError(f"A must be positive, got {self.A}")


def start_time_bound(rho: float) -> float:
    """Upper bound 0.5*log(2 sin rho / (1 + sin^2 rho)) on the normalized start time."""
    s = math.sin(rho)
    return 0.5 * math.log(2.0 * s / (1.0 + s * s))


def _check_rho(rho: float) -> None:
    if not 0.0 < rho <= 0.25 * math.pi + 1e-15:
        raise ValueError(f"rho must lie in (0, pi/4], got {rho}")


def initial_curve(rho: float, n: int) -> DiscreteCurve:
    """The oval through (cos rho, sin rho) at its orthogonality time, clipped to the disc.

    The right half is sampled uniformly in arc length and mirrored, so the
    curve is symmetric to round-off. Endpoints are exactly (+-cos rho, sin rho).
    """
    _check_rho(rho)
    if n < 64 or n % 2:
        raise ValueError(f"n must be even and at least 64, got {n}")
    p = ef.oval_params_for(rho)
    lam, S = p.lam, p.scale

    def fn(x):
        return ef.oval_height(p, x)

    def dfn(x):
        c = S * math.cosh(lam * x)
        return S * math.sinh(lam * x) / math.sqrt(max(1.0 - c * c, 1e-300))

    xr = math.cos(rho)
    half = sample_graph(fn, 0.0, xr, n // 2, dfn=dfn, strict=False).nodes.copy()
    half[-1] = (xr, math.sin(rho))
    left = half[:0:-1] * np.array([-1.0, 1.0])
    return DiscreteCurve(np.vstack([left, half]))


def construct(rho: float, cfg: FlowConfig) -> AncientApproximation:
    """Flow the oval initial curve to extinction and shift time so it is at 0."""
    init = initial_curve(rho, cfg.n_nodes)
    p = ef.oval_params_for(rho)
    traj = run(init, p.t, cfg)
    return AncientApproximation(rho=rho, lambda_rho=p.lam, t_rho=p.t, traj=traj.normalized())


def _construct_star(args):
    return construct(*args)


def construct_many(rhos, cfg: FlowConfig, jobs: int = 1) -> list[AncientApproximation]:
    if jobs > 1 and len(rhos) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as ex:
            return list(ex.map(_construct_star, [(r, cfg) for r in rhos]))
    return [construct(r, cfg) for r in rhos]


def family_distances(apps, t_compare: float) -> list[float]:
    """Hausdorff distances between consecutive members at a common normalized time."""
    for a in apps:
        if not a.traj.covers(t_compare):
            raise ValueError(
                f"rho={a.rho}: t={t_compare} outside [{a.traj.times[0]:.6g}, {a.traj.times[-1]:.6g}]"
            )
    curves = [a.traj.curve_at(t_compare) for a in apps]
    return [hausdorff(curves[i], curves[i + 1]) for i in range(len(curves) - 1)]


def family_cauchy(rhos, t_compare: float, cfg: FlowConfig, jobs: int = 1) -> list[float]:
    if not t_compare < 0.0:
        raise ValueError("t_compare must be negative")
    if len(rhos) < 2:
        return []
    return family_distances(construct_many(list(rhos), cfg, jobs), t_compare)


def _window_frames(app: AncientApproximation, window=None):
    traj = app.traj
    if window is None:
        t0 = traj.t0
        window = (t0, t0 + (0.0 - t0) / 3.0)
    t_a, t_b = window
    th = traj.series("theta_bar")
    idx = np.flatnonzero((traj.times >= t_a) & (traj.times <= t_b) & (th < FIT_THETA_MAX))
    if idx.size == 0:
        raise InsufficientDataError(f"no frames with theta_bar < {FIT_THETA_MAX} in {window}")
    return idx, (float(t_a), float(t_b))


def fit_A(app: AncientApproximation, window=None) -> AsymptoticFit:
    """Median of exp(-lambda0^2 t) * tip height over the window, and the profile residual."""
    lam0 = ef.solve_lambda0()
    idx, win = _window_frames(app, window)
    traj = app.traj
    t = traj.times[idx]
    y_min = traj.series("y_min")[idx]
    A = float(np.median(np.exp(-lam0 * lam0 * t) * y_min))
    res = 0.0
    for k in idx:
        c = traj.curves[k]
        rescaled = math.exp(-lam0 * lam0 * traj.times[k]) * c.y / A
        res = max(res, float(np.max(np.abs(rescaled - np.cosh(lam0 * c.x)))))
    return AsymptoticFit(A=A, window=win, profile_residual=res, resolution=traj.config.n_nodes)


def fit_decay_exponent(app: AncientApproximation, window=None) -> float:
    """Slope of a free straight-line fit of log(tip height) against t."""
    idx, _ = _window_frames(app, window)
    t = app.traj.times[idx]
    y = app.traj.series("y_min")[idx]
    return float(np.polyfit(t, np.log(y), 1)[0])


def backwards_convergence_check(app) -> CheckReport:
    """Earliest frame close to the diameter: distance <= tip height + h, total turning <= 0.1."""
    traj = app.traj if isinstance(app, AncientApproximation) else app
    c = traj.curves[0]
    g = traj.diagnostics[0]
    h = g.length / c.n
    dist = hausdorff(c, diameter(c.n))
    violation = max(dist - (max(g.y_min, 0.0) + h), 2.0 * abs(g.theta_bar) - 0.1)
    return CheckReport(
        name="backwards_convergence",
        worst_violation=float(violation),
        worst_time=float(traj.times[0]),
        tolerance=0.0,
    )
