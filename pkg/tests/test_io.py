import math

import numpy as np
import pytest

from fbcsf import ancient, io
from fbcsf.curve import diameter
from fbcsf.flow import FlowConfig, FlowTrajectory, run


@pytest.fixture(scope="module")
def small_run():
    cfg = FlowConfig(n_nodes=64)
    return ancient.construct(0.3, cfg).traj


def test_roundtrip_bit_identical(small_run, tmp_path):
    io.write_trajectory(small_run, tmp_path / "a", {"rho": 0.3})
    back = io.read_trajectory(tmp_path / "a")
    assert np.array_equal(back.times, small_run.times)
    assert all(np.array_equal(a.nodes, b.nodes) for a, b in zip(back.curves, small_run.curves))
    assert back.config == small_run.config
    assert back.extinction_estimate == small_run.extinction_estimate
    assert back.time_shift == small_run.time_shift
    assert back.flags == small_run.flags
    assert io.read_meta(tmp_path / "a")["rho"] == 0.3


def test_rewrite_is_byte_identical(small_run, tmp_path):
    io.write_trajectory(small_run, tmp_path / "a")
    io.write_trajectory(io.read_trajectory(tmp_path / "a"), tmp_path / "b")
    for name in ("frames.csv", "diag.csv", "meta.json"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()


def test_csv_layout(small_run, tmp_path):
    io.write_trajectory(small_run, tmp_path)
    frames = (tmp_path / "frames.csv").read_text().splitlines()
    assert frames[0] == "t,i,x,y,kappa"
    assert len(frames) == 1 + len(small_run) * 65
    diag = (tmp_path / "diag.csv").read_text().splitlines()
    assert diag[0] == "t,theta_bar,kappa_min,kappa_max,y_min,length,area,symmetry_defect,orth_residual"
    assert len(diag) == 1 + len(small_run)
    row = np.array(diag[1].split(","), dtype=float)
    g = small_run.diagnostics[0]
    assert row[1] == g.theta_bar and row[5] == g.length


def test_nan_written_as_null(tmp_path):
    d = diameter(16)
    tr = run(d, 0.0, FlowConfig(n_nodes=16, max_steps=5))
    assert math.isnan(tr.extinction_estimate)
    io.write_trajectory(tr, tmp_path)
    assert '"extinction_estimate": null' in (tmp_path / "meta.json").read_text()
    assert math.isnan(io.read_trajectory(tmp_path).extinction_estimate)


def test_dump_json_sorted_and_clean(tmp_path):
    io.dump_json({"b": np.float64(1.5), "a": [np.int64(2), math.inf]}, tmp_path / "x.json")
    assert io.load_json(tmp_path / "x.json") == {"a": [2, None], "b": 1.5}
    text = (tmp_path / "x.json").read_text()
    assert text.index('"a"') < text.index('"b"')


def test_single_frame_roundtrip(tmp_path):
    tr = FlowTrajectory(times=[-1.0], curves=[diameter(16)], config=FlowConfig(n_nodes=16))
    io.write_trajectory(tr, tmp_path)
    back = io.read_trajectory(tmp_path)
    assert len(back) == 1 and np.array_equal(back.curves[0].nodes, tr.curves[0].nodes)
