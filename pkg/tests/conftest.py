"""Shared expensive runs, built once per session."""

from __future__ import annotations

import time

import pytest

from fbcsf import ancient
from fbcsf.flow import FlowConfig

SESSION_START = time.monotonic()

# criterion number -> (passed, message); filled by test_acceptance
ACCEPTANCE: dict[int, tuple[bool, str]] = {}

FAMILY_RHOS = (0.4, 0.3, 0.2, 0.1)

# fixture name -> seconds spent building it
BUILD_SECONDS: dict[str, float] = {}


def _timed(name, fn):
    t = time.monotonic()
    out = fn()
    BUILD_SECONDS[name] = time.monotonic() - t
    return out


def pytest_collection_modifyitems(session, config, items):
    # the wall-clock criterion has to see every other test finish first
    last = [it for it in items if it.name == "test_criterion_10_suite_wall_clock"]
    others = [it for it in items if it.name != "test_criterion_10_suite_wall_clock"]
    items[:] = others + last


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not ACCEPTANCE:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for k in sorted(ACCEPTANCE):
        ok, msg = ACCEPTANCE[k]
        tr.write_line(f"criterion {k:2d}: {'PASS' if ok else 'FAIL'}  {msg}")


@pytest.fixture(scope="session")
def app_02_512():
    return _timed("app_02_512", lambda: ancient.construct(0.2, FlowConfig(n_nodes=512)))


@pytest.fixture(scope="session")
def app_01_512():
    return _timed("app_01_512", lambda: ancient.construct(0.1, FlowConfig(n_nodes=512)))


@pytest.fixture(scope="session")
def app_01_1024():
    return _timed("app_01_1024", lambda: ancient.construct(0.1, FlowConfig(n_nodes=1024)))


@pytest.fixture(scope="session")
def family_256():
    cfg = FlowConfig(n_nodes=256)
    return {r: ancient.construct(r, cfg) for r in FAMILY_RHOS + (0.05,)}


@pytest.fixture(scope="session")
def raw_02_256(family_256):
    """The rho = 0.2 run on its original clock (oval time)."""
    tr = family_256[0.2].traj
    return tr.shifted(-tr.time_shift)
