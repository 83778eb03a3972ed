"""Discrete curves in the closed unit disc with endpoints on the circle.

A :class:`DiscreteCurve` is an immutable polyline ``nodes[0..N]`` ordered left
to right. Curvature is signed counter-clockwise, so the convex cup-shaped
curves of the free boundary flow have positive curvature and their curvature
vectors point up, into the cap region ``Omega`` that contains ``(0, 1)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "MalformedCurveError",
    "DiscreteCurve",
    "CurveGeometry",
    "geometry",
    "resample",
    "symmetry_defect",
    "enclosed_area",
    "hausdorff",
    "point_polyline_distance",
    "is_simple",
    "sample_graph",
    "diameter",
    "circle_arc_curve",
]

MIN_SEGMENTS = 8
ENDPOINT_TOL = 1e-10


class MalformedCurveError(ValueError):
    """Degenerate segment, too few nodes, or a self-intersecting polyline."""


@dataclass(frozen=True, eq=False)
class DiscreteCurve:
    """Ordered planar polyline; endpoints must lie on the unit circle.

    ``strict=False`` skips the endpoint check, for synthetic test shapes.
    ``debug=True`` additionally rejects self-intersecting input.
    """

    nodes: np.ndarray
    strict: bool = True
    debug: bool = False
    convexity_warning: bool = field(default=False, compare=False)

    def __post_init__(self):
        nodes = np.array(self.nodes, dtype=float, copy=True)
        if nodes.ndim != 2 or nodes.shape[1] != 2:
            raise MalformedCurveError("nodes must have shape (N+1, 2)")
        if nodes.shape[0] - 1 < MIN_SEGMENTS:
            raise MalformedCurveError(
                f"need at least {MIN_SEGMENTS} segments, got {nodes.shape[0] - 1}"
            )
        if not np.all(np.isfinite(nodes)):
            raise MalformedCurveError("non-finite node coordinates")
        seg = np.hypot(*np.diff(nodes, axis=0).T)
        if np.any(seg <= 0.0):
            raise MalformedCurveError("zero-length segment")
        if self.strict:
            for k in (0, -1):
                r2 = nodes[k, 0] ** 2 + nodes[k, 1] ** 2
                if abs(r2 - 1.0) > ENDPOINT_TOL:
                    raise MalformedCurveError(
                        f"endpoint {k} off the unit circle: |r^2-1| = {abs(r2 - 1.0):.3e}"
                    )
        if self.debug and not is_simple(nodes):
            raise MalformedCurveError("polyline self-intersects")
        nodes.setflags(write=False)
        object.__setattr__(self, "nodes", nodes)

    @property
    def n(self) -> int:
        """Segment count N."""
        return self.nodes.shape[0] - 1

    @property
    def x(self) -> np.ndarray:
        return self.nodes[:, 0]

    @property
    def y(self) -> np.ndarray:
        return self.nodes[:, 1]

    def is_graphical(self) -> bool:
        return bool(np.all(np.diff(self.nodes[:, 0]) > 0.0))

    def mirrored(self) -> "DiscreteCurve":
        """Reflection across the y-axis, re-ordered left to right."""
        m = self.nodes[::-1].copy()
        m[:, 0] *= -1.0
        return DiscreteCurve(m, strict=False)

    def height_at(self, xs) -> np.ndarray:
        """Linear interpolation of the (graphical) curve's height at abscissae xs."""
        return np.interp(xs, self.nodes[:, 0], self.nodes[:, 1])


@dataclass(frozen=True, eq=False)
class CurveGeometry:
    arclength: np.ndarray
    kappa: np.ndarray
    turning: np.ndarray
    theta_bar: float
    y_min: float
    area: float
    length: float

    @property
    def kappa_min(self) -> float:
        return float(self.kappa.min())

    @property
    def kappa_max(self) -> float:
        return float(self.kappa.max())


def _quadratic_weights(a, b):
    """Lagrange derivative weights for nodes at chord parameters 0, a, a+b.

    Returns (first derivative at 0, at a, at a+b) and the constant second
    derivative, each as a 3-tuple of weights on (P0, P1, P2).
    """
    ab = a + b
    d_start = (-(2 * a + b) / (a * ab), ab / (a * b), -a / (b * ab))
    d_mid = (-b / (a * ab), (b - a) / (a * b), a / (b * ab))
    d_end = (b / (a * ab), -ab / (a * b), (a + 2 * b) / (ab * b))
    dd = (2.0 / (a * ab), -2.0 / (a * b), 2.0 / (ab * b))
    return d_start, d_mid, d_end, dd


def _combine(w, p0, p1, p2):
    return sum(np.asarray(wk)[..., None] * pk for wk, pk in zip(w, (p0, p1, p2)))


def _cross(u, v):
    return u[..., 0] * v[..., 1] - u[..., 1] * v[..., 0]


def _endpoint_curvature(pts, at_end: bool) -> float:
    # cubic through the four nodes nearest the end, in chord parameter
    pts = np.asarray(pts, dtype=float)
    u = np.concatenate([[0.0], np.cumsum(np.hypot(*np.diff(pts, axis=0).T))])
    u -= u[-1] if at_end else u[0]
    inv = np.linalg.inv(np.vander(u, 4, increasing=True))
    d1 = inv[1] @ pts
    d2 = 2.0 * (inv[2] @ pts)
    return float(_cross(d1, d2) / np.hypot(*d1) ** 3)


def geometry(c: DiscreteCurve) -> CurveGeometry:
    """Discrete arc length, curvature, turning angle and derived scalars.

    Interior curvature is the signed Menger curvature of each node triple;
    the endpoint values come from a one-sided cubic through the last four nodes.
    ``theta_bar`` is the polar angle of the right endpoint, which equals the
    boundary turning angle whenever the curve meets the circle orthogonally.
    """
    p = c.nodes
    d = np.diff(p, axis=0)
    seg = np.hypot(d[:, 0], d[:, 1])
    if np.any(seg <= 0.0):
        raise MalformedCurveError("zero-length segment")
    s = np.concatenate([[0.0], np.cumsum(seg)])

    kappa = np.empty(len(p))
    chord = np.hypot(*(p[2:] - p[:-2]).T)
    kappa[1:-1] = 2.0 * _cross(d[:-1], d[1:]) / (seg[:-1] * seg[1:] * chord)
    kappa[0] = _endpoint_curvature(p[:4], at_end=False)
    kappa[-1] = _endpoint_curvature(p[-4:], at_end=True)

    a, b = seg[:-1], seg[1:]
    _, d_mid, _, _ = _quadratic_weights(a, b)
    tang = np.empty_like(p)
    tang[1:-1] = _combine(d_mid, p[:-2], p[1:-1], p[2:])
    ds, _, _, _ = _quadratic_weights(seg[0], seg[1])
    tang[0] = _combine(ds, p[0], p[1], p[2])
    _, _, de, _ = _quadratic_weights(seg[-2], seg[-1])
    tang[-1] = _combine(de, p[-3], p[-2], p[-1])
    turning = np.unwrap(np.arctan2(tang[:, 1], tang[:, 0]))

    theta_bar = math.atan2(p[-1, 1], p[-1, 0])
    return CurveGeometry(
        arclength=s,
        kappa=kappa,
        turning=turning,
        theta_bar=theta_bar,
        y_min=_tip_height(p),
        area=enclosed_area(c, check_simple=False),
        length=float(s[-1]),
    )


def _tip_height(p: np.ndarray) -> float:
    k = int(np.argmin(p[:, 1]))
    if k == 0 or k == len(p) - 1:
        return float(p[k, 1])
    x0, x1, x2 = p[k - 1 : k + 2, 0]
    y0, y1, y2 = p[k - 1 : k + 2, 1]
    # vertex of the parabola y(x) through the three lowest nodes
    denom = (x0 - x1) * (x0 - x2) * (x1 - x2)
    if denom == 0.0:
        return float(y1)
    A = (x2 * (y1 - y0) + x1 * (y0 - y2) + x0 * (y2 - y1)) / denom
    B = (x2 * x2 * (y0 - y1) + x1 * x1 * (y2 - y0) + x0 * x0 * (y1 - y2)) / denom
    if A <= 0.0:
        return float(y1)
    xv = -B / (2.0 * A)
    if not x0 <= xv <= x2:
        return float(y1)
    C = y1 - A * x1 * x1 - B * x1
    return float(min(y1, C - B * B / (4.0 * A)))


def resample(c: DiscreteCurve, n: int) -> DiscreteCurve:
    """n+1 nodes equally spaced in cumulative chord length along the polyline.

    Positions are cubic Lagrange interpolants through the four input nodes
    around each target, so smooth curves are not flattened between nodes.
    """
    if n < MIN_SEGMENTS:
        raise ValueError(f"n must be >= {MIN_SEGMENTS}")
    p = c.nodes
    m = len(p)
    seg = np.hypot(*np.diff(p, axis=0).T)
    s = np.concatenate([[0.0], np.cumsum(seg)])
    target = np.linspace(0.0, s[-1], n + 1)
    k = np.clip(np.searchsorted(s, target, side="right") - 1, 0, m - 2)
    j0 = np.clip(k - 1, 0, m - 4)
    out = np.zeros((n + 1, 2))
    for a in range(4):
        w = np.ones(n + 1)
        for b in range(4):
            if b != a:
                w *= (target - s[j0 + b]) / (s[j0 + a] - s[j0 + b])
        out += w[:, None] * p[j0 + a]
    out[0], out[-1] = p[0], p[-1]
    return DiscreteCurve(out, strict=c.strict)


def point_polyline_distance(points: np.ndarray, poly: np.ndarray, chunk: int = 256) -> np.ndarray:
    """Distance from each point to the nearest point of a polyline."""
    a = poly[:-1]
    ab = poly[1:] - a
    ab2 = np.einsum("ij,ij->i", ab, ab)
    out = np.empty(len(points))
    for start in range(0, len(points), chunk):
        q = points[start : start + chunk, None, :]
        t = np.einsum("kij,ij->ki", q - a, ab) / ab2
        np.clip(t, 0.0, 1.0, out=t)
        proj = a + t[..., None] * ab
        out[start : start + chunk] = np.sqrt(((q - proj) ** 2).sum(-1).min(axis=1))
    return out


def hausdorff(a, b) -> float:
    """Symmetric vertex-to-polyline Hausdorff distance between two polylines."""
    pa = a.nodes if isinstance(a, DiscreteCurve) else np.asarray(a, float)
    pb = b.nodes if isinstance(b, DiscreteCurve) else np.asarray(b, float)
    return float(
        max(point_polyline_distance(pa, pb).max(), point_polyline_distance(pb, pa).max())
    )


def symmetry_defect(c: DiscreteCurve) -> float:
    """Hausdorff distance between the curve and its mirror image in the y-axis."""
    return hausdorff(c, c.mirrored())


def is_simple(nodes: np.ndarray) -> bool:
    p = np.asarray(nodes, float)
    if np.all(np.diff(p[:, 0]) > 0.0):
        return True
    a, b = p[:-1], p[1:]
    m = len(a)

    def orient(p, q, r):
        return np.sign(_cross(q - p, r - p))

    i, j = np.triu_indices(m, k=2)
    o1 = orient(a[i], b[i], a[j])
    o2 = orient(a[i], b[i], b[j])
    o3 = orient(a[j], b[j], a[i])
    o4 = orient(a[j], b[j], b[i])
    hit = (o1 * o2 < 0) & (o3 * o4 < 0)
    return not bool(np.any(hit))


def enclosed_area(c: DiscreteCurve, check_simple: bool = True) -> float:
    """Area of the cap region between the curve and the upper arc of the circle.

    The region is the one containing (0, 1): half the disc for the diameter,
    vanishing as the curve contracts to the top of the circle. Computed as the
    shoelace area between the curve and its closing chord plus the circular
    segment cut off by that chord.
    """
    p = c.nodes
    if check_simple and not is_simple(p):
        raise MalformedCurveError("polyline self-intersects")
    x, y = p[:, 0], p[:, 1]
    # curve left to right, then the chord back: counter-clockwise for a cup
    poly = 0.5 * (np.dot(x[:-1], y[1:]) - np.dot(x[1:], y[:-1]) + x[-1] * y[0] - x[0] * y[-1])
    phi_r = math.atan2(y[-1], x[-1])
    phi_l = math.atan2(y[0], x[0])
    delta = (phi_l - phi_r) % (2.0 * math.pi)
    return float(poly + 0.5 * (delta - math.sin(delta)))


def sample_graph(fn, x0: float, x1: float, n: int, dfn=None, strict: bool = True) -> DiscreteCurve:
    """Nodes of the graph y = fn(x) equally spaced in arc length.

    Arc length is computed by adaptive quadrature, so nodes lie exactly on the
    graph (no chord error). ``dfn`` is the slope; finite differences if omitted.
    """
    import warnings

    from scipy.integrate import IntegrationWarning, quad

    if dfn is None:
        def dfn(x, h=1e-6):
            return (fn(x + h) - fn(x - h)) / (2 * h)

    def speed(x):
        return math.sqrt(1.0 + dfn(x) ** 2)

    total = quad(speed, x0, x1, epsabs=1e-14, epsrel=1e-13, limit=200)[0]
    targets = np.linspace(0.0, total, n + 1)
    xs = np.empty(n + 1)
    xs[0], xs[-1] = x0, x1
    x_prev, s_prev = x0, 0.0
    # the tight tolerances below sit at round-off level; quad warns about that
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", IntegrationWarning)
        for k in range(1, n):
            x = x_prev + (targets[k] - s_prev) / speed(x_prev)
            for _ in range(30):
                s = s_prev + quad(speed, x_prev, x, epsabs=1e-15, epsrel=1e-14)[0]
                step = (s - targets[k]) / speed(x)
                x -= step
                if abs(step) < 1e-15:
                    break
            xs[k] = x
            x_prev, s_prev = x, targets[k]
    ys = np.array([fn(v) for v in xs])
    return DiscreteCurve(np.column_stack([xs, ys]), strict=strict)


def diameter(n: int) -> DiscreteCurve:
    """The horizontal bisector [-1, 1] x {0} with n uniform segments."""
    x = np.linspace(-1.0, 1.0, n + 1)
    return DiscreteCurve(np.column_stack([x, np.zeros_like(x)]))


def circle_arc_curve(center, radius: float, phi0: float, phi1: float, n: int, strict=False) -> DiscreteCurve:
    """Arc of a circle, counter-clockwise from centre angle phi0 to phi1."""
    phi = np.linspace(phi0, phi1, n + 1)
    pts = np.column_stack(
        [center[0] + radius * np.cos(phi), center[1] + radius * np.sin(phi)]
    )
    return DiscreteCurve(pts, strict=strict)
