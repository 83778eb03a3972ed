"""Compiled inner loops of the front-tracking scheme.

Arrays are (N+1, 2) float64 node coordinates. Work arrays are passed in so
the stepping loop does not allocate.
"""

import math

import numpy as np
from numba import njit

STOP_FRAME = 0
STOP_THETA = 1
STOP_LENGTH = 2
STOP_MAX_STEPS = 3
STOP_NONFINITE = 4

_FD_ANGLE = 1e-7


@njit(cache=True)
def curvature_vectors(X, K):
    """Menger curvature vector (towards the circumcentre, size 1/R) at interior nodes."""
    n = X.shape[0]
    K[0, 0] = 0.0
    K[0, 1] = 0.0
    K[n - 1, 0] = 0.0
    K[n - 1, 1] = 0.0
    for i in range(1, n - 1):
        ux = X[i - 1, 0] - X[i, 0]
        uy = X[i - 1, 1] - X[i, 1]
        vx = X[i + 1, 0] - X[i, 0]
        vy = X[i + 1, 1] - X[i, 1]
        d = 2.0 * (ux * vy - uy * vx)
        uu = ux * ux + uy * uy
        vv = vx * vx + vy * vy
        wx = vy * uu - uy * vv
        wy = ux * vv - vx * uu
        ww = wx * wx + wy * wy
        K[i, 0] = d * wx / ww
        K[i, 1] = d * wy / ww


@njit(cache=True)
def _tangent_residual(phi, p1x, p1y, p2x, p2y):
    # sine of the angle between the end tangent of the quadratic through
    # (p2, p1, E) and the radius through E = (cos phi, sin phi)
    ex = math.cos(phi)
    ey = math.sin(phi)
    a = math.hypot(p1x - p2x, p1y - p2y)
    b = math.hypot(ex - p1x, ey - p1y)
    ab = a + b
    w0 = b / (a * ab)
    w1 = -ab / (a * b)
    w2 = (a + 2.0 * b) / (ab * b)
    tx = w0 * p2x + w1 * p1x + w2 * ex
    ty = w0 * p2y + w1 * p1y + w2 * ey
    return (tx * ey - ty * ex) / math.hypot(tx, ty)


@njit(cache=True)
def attach_endpoint(p1x, p1y, p2x, p2y, order):
    """Boundary node on the unit circle for neighbour p1 and next neighbour p2.

    order 1: radial projection of p1 (last segment radial).
    order 2: the quadratic through p2, p1 and the endpoint has a radial
    tangent there; three Newton steps from the equal-spacing closed form.
    """
    if order == 1:
        r = math.hypot(p1x, p1y)
        return p1x / r, p1y / r
    phi = math.atan2(4.0 * p1y - p2y, 4.0 * p1x - p2x)
    for _ in range(3):
        g0 = _tangent_residual(phi, p1x, p1y, p2x, p2y)
        if g0 == 0.0:
            break
        g1 = _tangent_residual(phi + _FD_ANGLE, p1x, p1y, p2x, p2y)
        dg = (g1 - g0) / _FD_ANGLE
        if dg == 0.0:
            break
        phi -= g0 / dg
    return math.cos(phi), math.sin(phi)


@njit(cache=True)
def attach_ends(X, order):
    n = X.shape[0]
    ex, ey = attach_endpoint(X[1, 0], X[1, 1], X[2, 0], X[2, 1], order)
    X[0, 0] = ex
    X[0, 1] = ey
    ex, ey = attach_endpoint(X[n - 2, 0], X[n - 2, 1], X[n - 3, 0], X[n - 3, 1], order)
    X[n - 1, 0] = ex
    X[n - 1, 1] = ey


@njit(cache=True)
def resample_uniform(X, out, s):
    """Write into ``out`` the nodes equally spaced in chord length along X.

    Positions come from cubic interpolation in the cumulative chord length,
    so resampling does not cut corners at second order.

    Returns (length, shortest output segment).
    """
    n = X.shape[0]
    s[0] = 0.0
    for i in range(1, n):
        s[i] = s[i - 1] + math.hypot(X[i, 0] - X[i - 1, 0], X[i, 1] - X[i - 1, 1])
    L = s[n - 1]
    h = L / (n - 1)
    out[0, 0] = X[0, 0]
    out[0, 1] = X[0, 1]
    out[n - 1, 0] = X[n - 1, 0]
    out[n - 1, 1] = X[n - 1, 1]
    k = 0
    for j in range(1, n - 1):
        target = j * h
        while k < n - 2 and s[k + 1] < target:
            k += 1
        # cubic Lagrange through four nodes around the segment, in the chord parameter
        j0 = min(max(k - 1, 0), n - 4)
        ox = 0.0
        oy = 0.0
        for a in range(j0, j0 + 4):
            w = 1.0
            for b in range(j0, j0 + 4):
                if b != a:
                    w *= (target - s[b]) / (s[a] - s[b])
            ox += w * X[a, 0]
            oy += w * X[a, 1]
        out[j, 0] = ox
        out[j, 1] = oy
    hmin = np.inf
    for i in range(1, n):
        seg = math.hypot(out[i, 0] - out[i - 1, 0], out[i, 1] - out[i - 1, 1])
        if seg < hmin:
            hmin = seg
    return L, hmin


@njit(cache=True)
def min_segment(X):
    hmin = np.inf
    for i in range(1, X.shape[0]):
        seg = math.hypot(X[i, 0] - X[i - 1, 0], X[i, 1] - X[i - 1, 1])
        if seg < hmin:
            hmin = seg
    return hmin


@njit(cache=True)
def heun_step(X, dt, order, K1, K2, Y, s):
    """One predictor-corrector step in place on X; returns (length, hmin)."""
    n = X.shape[0]
    curvature_vectors(X, K1)
    for i in range(1, n - 1):
        Y[i, 0] = X[i, 0] + dt * K1[i, 0]
        Y[i, 1] = X[i, 1] + dt * K1[i, 1]
    attach_ends(Y, order)
    curvature_vectors(Y, K2)
    for i in range(1, n - 1):
        Y[i, 0] = X[i, 0] + 0.5 * dt * (K1[i, 0] + K2[i, 0])
        Y[i, 1] = X[i, 1] + 0.5 * dt * (K1[i, 1] + K2[i, 1])
    attach_ends(Y, order)
    return resample_uniform(Y, X, s)


@njit(cache=True)
def advance(X, t, cfl, order, t_frame, length_frame, theta_stop, length_stop, max_steps, clip=False):
    """Step in place until a frame boundary or a stop condition.

    With ``clip`` the last step is shortened to land exactly on t_frame.
    Returns (t, steps taken, reason code).
    """
    n = X.shape[0]
    K1 = np.empty_like(X)
    K2 = np.empty_like(X)
    Y = np.empty_like(X)
    s = np.empty(n)
    hmin = min_segment(X)
    steps = 0
    while True:
        if steps >= max_steps:
            return t, steps, STOP_MAX_STEPS
        dt = cfl * hmin * hmin
        if clip and t + dt >= t_frame:
            dt = t_frame - t
        L, hmin = heun_step(X, dt, order, K1, K2, Y, s)
        if clip and t + dt >= t_frame:
            t = t_frame
        else:
            t += dt
        steps += 1
        if not (math.isfinite(L) and math.isfinite(X[n - 1, 0]) and math.isfinite(X[n // 2, 1])):
            return t, steps, STOP_NONFINITE
        if math.atan2(X[n - 1, 1], X[n - 1, 0]) >= theta_stop:
            return t, steps, STOP_THETA
        if L <= length_stop:
            return t, steps, STOP_LENGTH
        if t >= t_frame or L <= length_frame:
            return t, steps, STOP_FRAME
