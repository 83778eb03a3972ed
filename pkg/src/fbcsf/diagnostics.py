"""Quantified pass/fail checks of comparison inequalities on stored trajectories.

Every check reads a trajectory and returns a CheckReport; nothing is
modified. Times are assumed normalized so that extinction is at t = 0.
Relative tolerances divide the raw violation by (1 + magnitude) of the
quantity being bounded.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field

import numpy as np

from . import exact_forms as ef
from .curve import symmetry_defect

__all__ = [
    "CheckReport",
    "EstimationError",
    "check_kappa_bounds",
    "check_sin_theta",
    "check_y_bounds",
    "check_speed_lower",
    "check_rescaled_monotone",
    "check_avoidance",
    "check_barrier_schedules",
    "check_kappa_decay",
    "check_length_area_monotone",
    "check_convexity",
    "check_kappa_increasing_right",
    "tightest_barrier_angles",
    "INEQUALITY_CHECKS",
    "run_checks",
]

NOT_APPLICABLE = "not-applicable"


class EstimationError(ValueError):
    """Too little data for a fitted check."""


@dataclass(frozen=True)
class CheckReport:
    name: str
    worst_violation: float
    worst_time: float
    tolerance: float
    status: str = ""
    details: dict = field(default_factory=dict)

    def __post_init__(self):
        if not self.status:
            ok = self.worst_violation <= self.tolerance
            object.__setattr__(self, "status", "pass" if ok else "fail")

    @property
    def passed(self) -> bool:
        """True when the check holds or does not apply."""
        return self.status != "fail"

    def to_dict(self) -> dict:
        d = asdict(self)
        d["pass"] = self.passed
        return d


def _worst(name, values, times, tol, **details) -> CheckReport:
    values = np.asarray(values, dtype=float)
    k = int(np.argmax(values))
    return CheckReport(name, float(values[k]), float(times[k]), tol, details=details)


def check_kappa_bounds(traj, tol: float = 5e-3) -> CheckReport:
    """min kappa <= tan(theta_bar) <= max kappa at every frame."""
    v = []
    for g in traj.diagnostics:
        tb = math.tan(g.theta_bar)
        v.append(max(g.kappa_min - tb, tb - g.kappa_max) / (1.0 + g.kappa_max))
    return _worst("kappa_bounds", v, traj.times, tol)


def check_sin_theta(traj, tol: float = 5e-3) -> CheckReport:
    """sin(theta_bar) <= e^t."""
    th = traj.series("theta_bar")
    bound = np.exp(traj.times)
    v = (np.sin(th) - bound) / (1.0 + bound)
    return _worst("sin_theta", v, traj.times, tol)


def check_y_bounds(traj, tol: float = 5e-3) -> CheckReport:
    """tan(theta_bar/2) <= tip height <= sin(theta_bar)."""
    th = traj.series("theta_bar")
    y = traj.series("y_min")
    lower = np.sin(th) / (1.0 + np.cos(th))
    upper = np.sin(th)
    v = np.maximum(lower - y, y - upper) / (1.0 + upper)
    return _worst("y_bounds", v, traj.times, tol)


def check_speed_lower(traj, tol: float = 1e-2) -> CheckReport:
    """Vertical speed kappa/cos(theta) >= lambda0 tan(lambda0 y) at every node."""
    lam0 = ef.solve_lambda0()
    v = []
    for c, g in zip(traj.curves, traj.diagnostics):
        speed = g.kappa / np.cos(g.turning)
        floor = lam0 * np.tan(lam0 * c.y)
        v.append(float(np.max(floor - speed)) / (1.0 + float(np.max(np.abs(speed)))))
    return _worst("speed_lower", v, traj.times, tol)


def check_rescaled_monotone(traj, tol: float = 1e-6) -> CheckReport:
    """exp(-lambda0^2 t) sin(lambda0 y(0, t)) is nondecreasing, per stored step."""
    lam0 = ef.solve_lambda0()
    y = traj.series("y_min")
    q = np.exp(-lam0 * lam0 * traj.times) * np.sin(lam0 * y)
    if len(q) < 2:
        raise EstimationError("need at least two frames")
    drop = -np.diff(q)
    return _worst("rescaled_monotone", drop, traj.times[1:], tol)


def _graph_gap(lower: np.ndarray, upper: np.ndarray, n_samples: int = 257):
    x0 = max(lower[0, 0], upper[0, 0])
    x1 = min(lower[-1, 0], upper[-1, 0])
    if not x1 > x0:
        return math.nan
    xs = np.linspace(x0, x1, n_samples)
    return float(np.min(np.interp(xs, upper[:, 0], upper[:, 1]) - np.interp(xs, lower[:, 0], lower[:, 1])))


def check_avoidance(a, b, tol: float = 1e-4) -> CheckReport:
    """Vertical gap b - a at shared abscissae stays nonnegative over common times.

    b is evaluated at each of a's frame times inside the overlap by linear
    interpolation in time.
    """
    lo = max(a.times[0], b.times[0])
    hi = min(a.times[-1], b.times[-1])
    idx = np.flatnonzero((a.times >= lo) & (a.times <= hi))
    if idx.size == 0:
        raise EstimationError("trajectories do not overlap in time")
    v, ts = [], []
    for k in idx:
        t = a.times[k]
        gap = _graph_gap(a.curves[k].nodes, b.curve_at(t))
        if math.isfinite(gap):
            v.append(-gap)
            ts.append(t)
    if not v:
        raise EstimationError("no frames with overlapping x-ranges")
    return _worst("avoidance", v, ts, tol)


def _barrier_sdist(theta: float, nodes: np.ndarray) -> np.ndarray:
    bc = ef.circle_barrier(theta)
    return bc.contains(nodes[:, 0], nodes[:, 1])


def _bisect_angle(pred, lo: float, hi: float, iters: int = 60) -> float:
    # pred false at lo, true at hi, monotone
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        if pred(mid):
            hi = mid
        else:
            lo = mid
    return hi


def tightest_barrier_angles(nodes: np.ndarray, slack: float = 1e-12) -> tuple[float, float]:
    """(largest theta with the curve above C_theta, smallest theta with it below)."""
    eps = 1e-9
    below = _bisect_angle(lambda th: np.min(_barrier_sdist(th, nodes)) >= -slack, eps, 0.5 * math.pi - eps)
    above = _bisect_angle(lambda th: not np.max(_barrier_sdist(th, nodes)) <= slack, eps, 0.5 * math.pi - eps)
    # the second bisection returns the first angle where the curve leaves the disc above
    return above, below


def check_barrier_schedules(traj, tol: float = 1e-3, swap: bool = False) -> CheckReport:
    """The curve stays between circle barriers moving with their schedules.

    At the first frame the tightest enclosing barriers C_{theta-} (below the
    curve) and C_{theta+} (above) are found. The upper one then moves with
    arcsin(e^{2t}) and the lower one with arcsin(e^t), each started at the
    schedule time matching its initial angle. ``swap`` exchanges the two
    exponents, which should break the check.
    """
    t0 = traj.times[0]
    th_lo, th_hi = tightest_barrier_angles(traj.curves[0].nodes)
    k_hi, k_lo = (1.0, 2.0) if swap else (2.0, 1.0)
    s_hi = math.log(math.sin(th_hi)) / k_hi
    s_lo = math.log(math.sin(th_lo)) / k_lo
    v, ts = [], []
    for t, c in zip(traj.times, traj.curves):
        worst = -math.inf
        a_hi = s_hi + t - t0
        if a_hi < 0.0:
            th = math.asin(math.exp(k_hi * a_hi))
            worst = max(worst, float(np.max(-_barrier_sdist(th, c.nodes))))
        a_lo = s_lo + t - t0
        if a_lo < 0.0:
            th = math.asin(math.exp(k_lo * a_lo))
            worst = max(worst, float(np.max(_barrier_sdist(th, c.nodes))))
        if math.isfinite(worst):
            v.append(worst)
            ts.append(t)
    return _worst(
        "barrier_schedules", v, ts, tol, theta_lower=th_lo, theta_upper=th_hi, swapped=swap
    )


def check_kappa_decay(traj, slope_range=(0.8, 1.2), min_frames: int = 5) -> CheckReport:
    """Straight-line fit of log(max kappa) against t over the earliest third of frames."""
    m = len(traj) // 3
    if m < min_frames:
        raise EstimationError(f"only {m} frames in the fit window, need {min_frames}")
    kmax = traj.series("kappa_max")[:m]
    t = traj.times[:m]
    if np.max(np.abs(kmax)) <= 1e-12:
        return CheckReport("kappa_decay", 0.0, float(t[0]), 0.0, status=NOT_APPLICABLE)
    if np.min(kmax) <= 0.0:
        raise EstimationError("max curvature not positive in the fit window")
    slope = float(np.polyfit(t, np.log(kmax), 1)[0])
    lo, hi = slope_range
    v = max(lo - slope, slope - hi, 0.0)
    return CheckReport("kappa_decay", v, float(t[0]), 0.0, details={"slope": slope})


def check_length_area_monotone(traj, tol: float = 1e-10) -> CheckReport:
    """Length and enclosed area never increase between stored frames."""
    L = traj.series("length")
    A = traj.series("area")
    v = np.maximum(np.diff(L), np.diff(A))
    return _worst("length_area_monotone", v, traj.times[1:], tol)


def check_convexity(traj, tol: float = 1e-6) -> CheckReport:
    """min kappa >= -tol * max kappa."""
    v = [-g.kappa_min / max(g.kappa_max, 1e-300) for g in traj.diagnostics]
    return _worst("convexity", v, traj.times, tol)


def check_kappa_increasing_right(traj, tol: float = 1e-6, skip_fraction: float = 0.01) -> CheckReport:
    """Arc-length differences of kappa are positive on {x > 0}.

    Frames in the first ``skip_fraction`` of the run's steps are skipped,
    measured by frame time since steps are not stored individually.
    """
    t_skip = traj.times[0] + skip_fraction * (traj.times[-1] - traj.times[0])
    v, ts = [], []
    for t, c, g in zip(traj.times, traj.curves, traj.diagnostics):
        if t < t_skip:
            continue
        right = c.x[:-1] > 0.0
        dk = np.diff(g.kappa)[right] / (1.0 + g.kappa_max)
        if dk.size:
            v.append(float(np.max(-dk)))
            ts.append(t)
    if not v:
        raise EstimationError("no frames after the skipped start")
    return _worst("kappa_increasing_right", v, ts, tol)


def symmetry_series(traj) -> np.ndarray:
    return np.array([symmetry_defect(c) for c in traj.curves])


INEQUALITY_CHECKS = {
    "kappa_bounds": check_kappa_bounds,
    "sin_theta": check_sin_theta,
    "y_bounds": check_y_bounds,
    "speed_lower": check_speed_lower,
    "rescaled_monotone": check_rescaled_monotone,
    "barrier_schedules": check_barrier_schedules,
    "kappa_decay": check_kappa_decay,
}


def run_checks(traj, names=None) -> list[CheckReport]:
    """Single-trajectory checks by name (all of INEQUALITY_CHECKS when names is None)."""
    names = list(INEQUALITY_CHECKS) if names is None else list(names)
    out = []
    for n in names:
        if n not in INEQUALITY_CHECKS:
            raise KeyError(f"unknown check {n!r}; choose from {sorted(INEQUALITY_CHECKS)}")
        out.append(INEQUALITY_CHECKS[n](traj))
    return out
