"""Closed-form comparison solutions and transcendental constants.

Everything here is a pure function of its arguments. The circle barriers
``C_theta`` meet the unit circle orthogonally; the shifted Angenent ovals
``sin(lam*y) = exp(lam^2 t) cosh(lam*x)`` are exact curve shortening flows
used both as initial data and as oracles for the flow solver.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "CircleBarrier",
    "OvalParams",
    "CriticalConstants",
    "OvalDomainError",
    "solve_lambda0",
    "critical_constants",
    "boundary_angle_fn",
    "boundary_angle_dlambda",
    "solve_lambda_theta",
    "orthogonality_time",
    "oval_params_for",
    "oval_height",
    "oval_half_width",
    "circle_barrier",
    "circle_schedules",
    "tangent_circle_angle",
]

_BRACKET_WIDTH = 1e-13
_NEWTON_POLISH = 3


class OvalDomainError(ValueError):
    """Raised when an abscissa lies outside the oval's horizontal extent."""


@dataclass(frozen=True)
class CircleBarrier:
    theta: float
    center_y: float
    radius: float

    def contains(self, x, y):
        """Signed distance to the circle, negative inside the disc it bounds."""
        return np.hypot(x, np.asarray(y) - self.center_y) - self.radius

    def lower_arc(self, n: int = 129) -> np.ndarray:
        """Points of the barrier inside the closed unit disc, left to right."""
        # centre angles of the in-disc arc: 3pi/2 -+ theta
        phi = np.linspace(1.5 * math.pi - self.theta, 1.5 * math.pi + self.theta, n)
        return np.column_stack(
            [self.radius * np.cos(phi), self.center_y + self.radius * np.sin(phi)]
        )


@dataclass(frozen=True)
class OvalParams:
    lam: float
    t: float

    def __post_init__(self):
        if not self.lam > 0.0:
            raise ValueError(f"lambda must be positive, got {self.lam}")
        if not self.t < 0.0:
            raise ValueError(f"oval time must be negative, got {self.t}")

    @property
    def scale(self) -> float:
        """exp(lam^2 t), the factor multiplying cosh in the defining relation."""
        return math.exp(self.lam * self.lam * self.t)


@dataclass(frozen=True)
class CriticalConstants:
    lambda0: float
    mu_neg: float


def _bisect_newton(g, dg, lo: float, hi: float) -> float:
    glo = g(lo)
    ghi = g(hi)
    if glo == 0.0:
        return lo
    if ghi == 0.0:
        return hi
    if glo * ghi > 0.0:
        raise ValueError(f"root not bracketed on [{lo}, {hi}]")
    while hi - lo > _BRACKET_WIDTH * max(1.0, abs(lo)):
        mid = 0.5 * (lo + hi)
        gm = g(mid)
        if gm == 0.0:
            return mid
        if (gm < 0.0) == (glo < 0.0):
            lo, glo = mid, gm
        else:
            hi = mid
    x = 0.5 * (lo + hi)
    for _ in range(_NEWTON_POLISH):
        d = dg(x)
        if d == 0.0:
            break
        step = g(x) / d
        # polish must stay inside the final bracket
        if lo <= x - step <= hi:
            x -= step
    return x


def solve_lambda0() -> float:
    """Unique positive root of lam * tanh(lam) = 1."""
    return _bisect_newton(
        lambda lam: lam * math.tanh(lam) - 1.0,
        lambda lam: math.tanh(lam) + lam / math.cosh(lam) ** 2,
        1.0,
        1.5,
    )


def critical_constants() -> CriticalConstants:
    lam0 = solve_lambda0()
    return CriticalConstants(lambda0=lam0, mu_neg=-lam0 * lam0)


def _check_theta(theta: float) -> None:
    if not 0.0 < theta < 0.5 * math.pi:
        raise ValueError(f"angle must lie in (0, pi/2), got {theta}")


def boundary_angle_fn(lam: float, theta: float) -> float:
    """cos(th) tanh(lam cos th) - sin(th) cot(lam sin th).

    Proportional, with a positive factor, to the inner product of the oval's
    outward normal with the position vector at (cos th, sin th).
    """
    _check_theta(theta)
    s, c = math.sin(theta), math.cos(theta)
    if not 0.0 < lam < math.pi / s:
        raise ValueError(f"lambda={lam} outside (0, pi/sin(theta)) for theta={theta}")
    return c * math.tanh(lam * c) - s / math.tan(lam * s)


def boundary_angle_dlambda(lam: float, theta: float) -> float:
    """Partial derivative of boundary_angle_fn in lambda (always positive)."""
    s, c = math.sin(theta), math.cos(theta)
    return c * c * (1.0 - math.tanh(lam * c) ** 2) + s * s * (
        1.0 + 1.0 / math.tan(lam * s) ** 2
    )


def solve_lambda_theta(theta: float) -> float:
    """The unique zero of boundary_angle_fn(., theta) in (0, pi/(2 sin theta))."""
    _check_theta(theta)
    hi = 0.5 * math.pi / math.sin(theta)
    lo = 1e-9 * hi
    return _bisect_newton(
        lambda lam: boundary_angle_fn(lam, theta),
        lambda lam: boundary_angle_dlambda(lam, theta),
        lo,
        hi,
    )


def orthogonality_time(rho: float) -> float:
    """Time at which the oval with lambda(rho) meets the circle orthogonally at angle rho."""
    _check_theta(rho)
    lam = solve_lambda_theta(rho)
    ratio = math.cosh(lam * math.cos(rho)) / math.sin(lam * math.sin(rho))
    return -math.log(ratio) / (lam * lam)


def oval_params_for(rho: float) -> OvalParams:
    return OvalParams(lam=solve_lambda_theta(rho), t=orthogonality_time(rho))


def oval_half_width(p: OvalParams) -> float:
    """Largest |x| on the oval, where both arcsine branches meet."""
    return math.acosh(1.0 / p.scale) / p.lam


def oval_height(p: OvalParams, x):
    """Lower-branch height y(x) of the oval, lam*y in (0, pi/2].

    Accepts scalars or arrays. Raises OvalDomainError outside the oval.
    """
    xa = np.asarray(x, dtype=float)
    arg = p.scale * np.cosh(p.lam * xa)
    # allow round-off at the widest point
    if np.any(arg > 1.0 + 1e-14):
        raise OvalDomainError(
            f"|x| exceeds the oval half width {oval_half_width(p)!r}"
        )
    y = np.arcsin(np.minimum(arg, 1.0)) / p.lam
    return float(y) if np.ndim(y) == 0 else y


def circle_barrier(theta: float) -> CircleBarrier:
    _check_theta(theta)
    return CircleBarrier(
        theta=theta, center_y=1.0 / math.sin(theta), radius=math.cos(theta) / math.sin(theta)
    )


def circle_schedules(t: float) -> tuple[float, float, float]:
    """(theta_minus, theta_plus, omega) at time t <= 0.

    theta_minus = arcsin e^t and theta_plus = arcsin e^{2t} drive the
    sub- and supersolution circles; omega solves (1 - cos w)/sin w = e^t.
    """
    if t > 0.0:
        raise ValueError(f"schedules are defined for t <= 0, got {t}")
    et = math.exp(t)
    return math.asin(et), math.asin(et * et), 2.0 * math.atan(et)


def tangent_circle_angle(rho: float) -> float:
    """Angle of the barrier circle tangent to the line y = sin(rho)."""
    _check_theta(rho)
    s = math.sin(rho)
    return math.asin(2.0 * s / (1.0 + s * s))
