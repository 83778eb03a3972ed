import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fbcsf import ancient, diagnostics as dg, exact_forms as ef, flow
from fbcsf.curve import diameter, geometry, symmetry_defect
from fbcsf.flow import FlowConfig, FlowTrajectory, StepRejected


def admissible(c, cfg):
    seg = np.hypot(*np.diff(c.nodes, axis=0).T)
    return cfg.cfl * seg.min() ** 2


def test_config_validation_and_roundtrip():
    for bad in (dict(cfl=0.0), dict(cfl=0.6), dict(boundary_order=3), dict(n_nodes=4), dict(stop_theta_bar=2.0)):
        with pytest.raises(ValueError):
            FlowConfig(**bad)
    cfg = FlowConfig(n_nodes=128, cfl=0.3)
    assert FlowConfig.from_dict(cfg.to_dict()) == cfg


def test_diameter_is_fixed_by_one_step():
    d = diameter(128)
    cfg = FlowConfig(n_nodes=128)
    out = flow.step(d, admissible(d, cfg), cfg)
    assert np.max(np.abs(out.nodes - d.nodes)) <= 1e-14


@pytest.mark.parametrize("order", [1, 2])
def test_diameter_fixed_point_many_steps(order):
    d = diameter(64)
    cfg = FlowConfig(n_nodes=64, boundary_order=order)
    c = d
    dt = admissible(d, cfg)
    for _ in range(1000):
        c = flow.step(c, dt, cfg)
    assert np.max(np.abs(c.nodes - d.nodes)) <= 1e-10


def test_step_rejects_cfl_violation():
    c = ancient.initial_curve(0.3, 64)
    cfg = FlowConfig(n_nodes=64)
    ok = admissible(c, cfg)
    with pytest.raises(StepRejected) as info:
        flow.step(c, 1.5 * ok, cfg)
    assert info.value.admissible_dt == pytest.approx(ok, rel=1e-14)
    with pytest.raises(ValueError):
        flow.step(c, -1e-6, cfg)
    flow.step(c, ok, cfg)


@settings(max_examples=10, deadline=None)
@given(rho=st.floats(0.05, 0.78), n=st.sampled_from([64, 96, 128]), order=st.sampled_from([1, 2]))
def test_step_preserves_symmetry(rho, n, order):
    c = ancient.initial_curve(rho, n)
    cfg = FlowConfig(n_nodes=n, boundary_order=order)
    out = flow.step(c, admissible(c, cfg), cfg)
    assert symmetry_defect(out) <= 1e-12
    assert abs(math.hypot(*out.nodes[-1]) - 1.0) <= 1e-14
    assert not out.convexity_warning


def oval_step_defect(rho, n, dt):
    """Per-unit-time mismatch of one step against the closed-form oval, interior nodes."""
    p = ef.oval_params_for(rho)
    c0 = ancient.initial_curve(rho, n)
    c1 = flow.step(c0, dt, FlowConfig(n_nodes=n))
    later = ef.OvalParams(p.lam, p.t + dt)
    m = n // 10
    x, y = c1.x[m : n + 1 - m], c1.y[m : n + 1 - m]
    return float(np.max(np.abs(y - ef.oval_height(later, x)))) / dt


def test_one_step_matches_oval_second_order():
    rho = 0.2
    cfg = FlowConfig(n_nodes=1024)
    dt = admissible(ancient.initial_curve(rho, 1024), cfg)
    ns = (128, 256, 512, 1024)
    errs = np.array([oval_step_defect(rho, n, dt) for n in ns])
    order = -np.polyfit(np.log(ns), np.log(errs), 1)[0]
    assert order >= 1.8
    assert errs[-1] < 1e-6


def test_tip_height_grid_convergence():
    rho = 0.2
    p = ef.oval_params_for(rho)
    ys = []
    for n in (64, 128, 256, 512):
        c = flow.evolve(ancient.initial_curve(rho, n), p.t, p.t + 0.6, FlowConfig(n_nodes=n))
        ys.append(c.y[n // 2])
    d = np.abs(np.diff(ys))
    orders = np.log2(d[:-1] / d[1:])
    assert np.all(orders >= 1.8), orders


def test_evolve_lands_on_time_and_validates():
    c = ancient.initial_curve(0.3, 64)
    cfg = FlowConfig(n_nodes=64)
    out = flow.evolve(c, -1.0, -0.99, cfg)
    assert out.n == 64
    with pytest.raises(ValueError):
        flow.evolve(c, -1.0, -1.0, cfg)


@pytest.mark.parametrize("order,power", [(1, 1.0), (2, 2.0)])
def test_orthogonality_residual_scales(order, power):
    res = []
    for n in (64, 128, 256):
        p = ef.oval_params_for(0.3)
        c = flow.evolve(ancient.initial_curve(0.3, n), p.t, p.t + 0.05, FlowConfig(n_nodes=n, boundary_order=order))
        res.append(flow.orthogonality_residual(c))
    res = np.array(res)
    h = np.array([1 / 64, 1 / 128, 1 / 256])
    assert np.all(res <= 10.0 * h**power), res


def test_run_monotone_quantities(raw_02_256):
    tr = raw_02_256
    assert tr.stop_reason == "theta_bar"
    assert tr.flags == ()
    assert np.all(np.diff(tr.times) > 0)
    th = tr.series("theta_bar")
    L = tr.series("length")
    A = tr.series("area")
    assert np.all(np.diff(th) > 0)
    assert np.all(np.diff(L) < 0)
    assert np.all(np.diff(A) <= 1e-10)
    for c in tr.curves:
        for k in (0, -1):
            assert abs(c.nodes[k] @ c.nodes[k] - 1.0) <= 1e-10


def test_run_keeps_convexity_and_kappa_increasing(raw_02_256):
    assert dg.check_convexity(raw_02_256).passed
    assert dg.check_kappa_increasing_right(raw_02_256).passed
    assert dg.check_length_area_monotone(raw_02_256).passed


def test_area_rate_is_total_turning(raw_02_256):
    tr = raw_02_256
    t = tr.times
    A = tr.series("area")
    th = tr.series("theta_bar")
    k = np.arange(1, len(t) - 1)
    k = k[(th[k] > 0.25) & (th[k] < 1.3)]
    rate = (A[k + 1] - A[k - 1]) / (t[k + 1] - t[k - 1])
    assert np.max(np.abs(rate / (-2.0 * th[k]) - 1.0)) <= 0.02


def test_orthogonality_at_every_frame(raw_02_256):
    h = 2.0 / 256
    res = [flow.orthogonality_residual(c) for c in raw_02_256.curves[::25]]
    assert max(res) <= 10 * h * h


def test_stays_between_circle_barriers(raw_02_256):
    rep = dg.check_barrier_schedules(raw_02_256)
    assert rep.passed, rep


def test_nested_runs_never_cross(raw_02_256):
    cfg = raw_02_256.config
    k = 100
    upper = flow.run(raw_02_256.curves[k], raw_02_256.times[0], cfg)
    rep = dg.check_avoidance(raw_02_256, upper, tol=1e-4)
    assert rep.passed, rep


def test_extinction_two_resolutions(family_256, app_02_512):
    a = family_256[0.2].traj
    b = app_02_512.traj
    # raw extinction = estimate on the original clock
    ta = a.extinction_estimate - a.time_shift
    tb = b.extinction_estimate - b.time_shift
    assert abs(ta - tb) <= 1e-3


def test_extinction_normalized_sin_bound(family_256):
    assert dg.check_sin_theta(family_256[0.2].traj, tol=5e-3).passed


def test_extinction_requires_near_extinction():
    c = ancient.initial_curve(0.2, 64)
    tr = flow.run(c, -1.38, FlowConfig(n_nodes=64, max_steps=200))
    assert tr.stop_reason == "max_steps"
    assert "not_converged" in tr.flags
    assert math.isnan(tr.extinction_estimate)
    assert tr.series("theta_bar")[-1] < 0.5
    with pytest.raises(flow.ExtinctionEstimateError):
        flow.extinction_time(tr)


def test_trajectory_invariants():
    c = diameter(16)
    with pytest.raises(ValueError):
        FlowTrajectory(times=[0.0, 0.0], curves=[c, c], config=FlowConfig(n_nodes=16))
    tr = FlowTrajectory(times=[0.0, 1.0], curves=[c, c], config=FlowConfig(n_nodes=16))
    assert np.allclose(tr.curve_at(0.5), c.nodes)
    with pytest.raises(ValueError):
        tr.curve_at(2.0)
    with pytest.raises(ValueError):
        tr.times[0] = 3.0


def test_run_resamples_initial_to_config():
    c = ancient.initial_curve(0.4, 64)
    tr = flow.run(c, ef.orthogonality_time(0.4), FlowConfig(n_nodes=32, max_steps=10, frame_dt=1e-9))
    assert all(cv.n == 32 for cv in tr.curves)


def test_run_frames_bounded_by_stride(raw_02_256):
    dt = np.diff(raw_02_256.times)
    # the step that crosses the stride may overshoot it by one admissible step
    h = 2.0 / raw_02_256.config.n_nodes
    assert np.max(dt) <= raw_02_256.config.frame_dt + raw_02_256.config.cfl * h * h


def test_geometry_of_final_frame(raw_02_256):
    g = geometry(raw_02_256.curves[-1])
    assert g.theta_bar >= raw_02_256.config.stop_theta_bar
