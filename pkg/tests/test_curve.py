import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.integrate import quad

from fbcsf import exact_forms as ef
from fbcsf.curve import (
    DiscreteCurve,
    MalformedCurveError,
    circle_arc_curve,
    diameter,
    enclosed_area,
    geometry,
    hausdorff,
    is_simple,
    resample,
    sample_graph,
    symmetry_defect,
)


def barrier_curve(theta, n):
    b = ef.circle_barrier(theta)
    return circle_arc_curve((0.0, b.center_y), b.radius, 1.5 * math.pi - theta, 1.5 * math.pi + theta, n, strict=True)


def area_above_barrier(theta):
    """Area of the part of the disc above C_theta (the side containing (0, 1)), by quadrature."""
    b = ef.circle_barrier(theta)
    c = math.cos(theta)

    def inner(x):
        return b.center_y - math.sqrt(b.radius**2 - x * x) + math.sqrt(1 - x * x)

    def outer(x):
        return 2 * math.sqrt(1 - x * x)

    below = quad(inner, -c, c, epsabs=1e-13)[0] + 2 * quad(outer, c, 1.0, epsabs=1e-13)[0]
    return math.pi - below


def test_construction_errors():
    with pytest.raises(MalformedCurveError):
        DiscreteCurve(np.zeros((5, 2)), strict=False)
    with pytest.raises(MalformedCurveError):
        DiscreteCurve(np.zeros((20, 3)), strict=False)
    bad = diameter(16).nodes.copy()
    bad[3] = bad[2]
    with pytest.raises(MalformedCurveError):
        DiscreteCurve(bad)
    off = diameter(16).nodes * 0.9
    with pytest.raises(MalformedCurveError):
        DiscreteCurve(off)
    DiscreteCurve(off, strict=False)
    nan = diameter(16).nodes.copy()
    nan[4, 1] = math.nan
    with pytest.raises(MalformedCurveError):
        DiscreteCurve(nan)


def test_self_intersection_detected_in_debug():
    t = np.linspace(0, 1, 21)
    zig = np.column_stack([np.cos(4 * math.pi * t) * (1 - t), np.sin(4 * math.pi * t) * t])
    assert not is_simple(zig)
    with pytest.raises(MalformedCurveError):
        DiscreteCurve(zig, strict=False, debug=True)


def test_nodes_immutable():
    c = diameter(16)
    with pytest.raises(ValueError):
        c.nodes[0, 0] = 3.0


def test_diameter_geometry():
    g = geometry(diameter(256))
    assert np.all(g.kappa == 0.0)
    assert g.theta_bar == 0.0
    assert g.length == pytest.approx(2.0, abs=1e-14)
    assert g.area == pytest.approx(math.pi / 2, abs=1e-6)
    assert g.y_min == 0.0


@pytest.mark.parametrize("theta", [0.2, 0.6, 1.0])
def test_barrier_arc_geometry(theta):
    c = barrier_curve(theta, 128)
    g = geometry(c)
    assert g.kappa[1:-1] == pytest.approx(np.full(127, math.tan(theta)), rel=1e-9)
    # one-sided cubic at the ends
    assert g.kappa[[0, -1]] == pytest.approx([math.tan(theta)] * 2, rel=1e-3)
    assert g.theta_bar == pytest.approx(theta, abs=1e-14)
    assert g.y_min == pytest.approx(math.tan(theta / 2), abs=1e-4)
    # turning at the right end is radial
    assert g.turning[-1] == pytest.approx(theta, abs=1e-3)


@pytest.mark.parametrize("theta", [0.3, 0.8, 1.3])
def test_area_matches_quadrature(theta):
    c = barrier_curve(theta, 1024)
    # polygon inscribed in the arc misses O(h^2) of area per unit length
    assert enclosed_area(c) == pytest.approx(area_above_barrier(theta), abs=2e-5)


def test_area_near_extinction_small():
    assert enclosed_area(barrier_curve(1.55, 64)) < 1e-2


def test_enclosed_area_rejects_nonsimple():
    t = np.linspace(0, 1, 21)
    zig = np.column_stack([np.cos(4 * math.pi * t) * (1 - t), np.sin(4 * math.pi * t) * t])
    with pytest.raises(MalformedCurveError):
        enclosed_area(DiscreteCurve(zig, strict=False))


def _ellipse_kappa_errors(ns):
    # nonuniform sampling of an ellipse arc, resampled, then curvature vs exact
    a, b = 1.0, 0.5
    errs = []
    for n in ns:
        u = np.linspace(0.2, 1.2, n + 1) ** 1.3
        pts = np.column_stack([a * np.cos(u), b * np.sin(u)])
        c = resample(DiscreteCurve(pts, strict=False), n)
        g = geometry(c)
        uu = np.arctan2(c.y / b, c.x / a)
        exact = a * b / (a * a * np.sin(uu) ** 2 + b * b * np.cos(uu) ** 2) ** 1.5
        e = np.abs(g.kappa - exact)
        errs.append((e[1:-1].max(), max(e[0], e[-1])))
    return np.array(errs)


def test_curvature_second_order_under_resample():
    errs = _ellipse_kappa_errors((128, 256, 512, 1024))
    interior = np.log2(errs[:-1, 0] / errs[1:, 0])
    ends = np.log2(errs[:-1, 1] / errs[1:, 1])
    assert np.all(interior >= 1.8), interior
    # four-node one-sided cubic keeps the ends second order too
    assert np.all(ends >= 1.8), ends


def test_resample_uniform_and_keeps_endpoints():
    c = barrier_curve(0.7, 50)
    r = resample(c, 80)
    seg = np.hypot(*np.diff(r.nodes, axis=0).T)
    assert np.ptp(seg) / seg.mean() < 1e-3
    assert np.array_equal(r.nodes[0], c.nodes[0])
    assert np.array_equal(r.nodes[-1], c.nodes[-1])
    b = ef.circle_barrier(0.7)
    assert np.max(np.abs(np.hypot(r.x, r.y - b.center_y) - b.radius)) < 1e-6


def test_sample_graph_uniform_arclength():
    c = sample_graph(lambda x: 0.3 * x * x, -1.0, 1.0, 64, strict=False)
    arcs = [quad(lambda x: math.sqrt(1 + 0.36 * x * x), x0, x1)[0] for x0, x1 in zip(c.x[:-1], c.x[1:])]
    assert np.ptp(arcs) < 1e-11
    assert np.allclose(c.y, 0.3 * c.x**2, atol=1e-15)


def test_symmetry_defect():
    c = barrier_curve(0.5, 64)
    assert symmetry_defect(c) < 1e-12
    tilted = DiscreteCurve(c.nodes + np.column_stack([np.zeros(65), 0.05 * c.x]), strict=False)
    assert symmetry_defect(tilted) > 1e-2


def test_hausdorff_basic():
    d = diameter(32)
    lifted = DiscreteCurve(d.nodes + [0.0, 0.1], strict=False)
    assert hausdorff(d, d) == 0.0
    assert hausdorff(d, lifted) == pytest.approx(0.1, abs=1e-15)
    # a refined copy of the same polyline is at distance zero
    assert hausdorff(d, diameter(64)) < 1e-15


@settings(max_examples=40, deadline=None)
@given(
    st.floats(0.05, 1.4),
    st.floats(0.05, 1.4),
    st.integers(16, 80),
    st.integers(16, 80),
)
def test_hausdorff_symmetric_and_triangle(t1, t2, n1, n2):
    a = barrier_curve(t1, n1)
    b = barrier_curve(t2, n2)
    c = diameter(24)
    dab = hausdorff(a, b)
    assert dab == pytest.approx(hausdorff(b, a), abs=1e-15)
    assert dab >= 0.0
    # vertex-to-polyline distances still obey the triangle inequality up to chord error
    assert dab <= hausdorff(a, c) + hausdorff(c, b) + 1e-2


@settings(max_examples=40, deadline=None)
@given(st.floats(0.05, 1.5))
def test_circle_arc_bounds_hold(theta):
    # y_min = tan(theta/2) and kappa = tan(theta) for the barrier arcs
    g = geometry(barrier_curve(theta, 64))
    assert g.kappa_min == pytest.approx(math.tan(theta), rel=5e-3)
    assert g.y_min <= math.sin(theta) + 1e-12
    assert g.y_min >= math.tan(theta / 2) - 1e-3


def test_mirror_and_height():
    c = barrier_curve(0.4, 40)
    m = c.mirrored()
    assert np.allclose(m.nodes, c.nodes, atol=1e-15)
    assert c.is_graphical()
    assert c.height_at(0.0) == pytest.approx(math.tan(0.2), abs=1e-3)
