import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from semiwave.freeboundary import (
    SolverConfig,
    boundary_flux,
    compare_ordered,
    cutoff,
    evolve,
    init_cutoff,
    step,
    steady_for_run,
)
from semiwave.media import bounds, constant_medium, quasi_periodic_medium

CFG = SolverConfig(dx=0.05, dt=1e-3, L=30, snapshot_stride=500, transient_cutoff=10)


@pytest.fixture(scope="module")
def qp_run():
    m = quasi_periodic_medium()
    steady = steady_for_run(m, CFG, -10.0, 20.0)
    traj = evolve(init_cutoff(m, steady, -10.0, 4, CFG), CFG, stop_h=10.0)
    return m, steady, traj


@given(st.floats(0.01, 1.0), st.floats(1.01, 5.0))
def test_dt_above_limit_rejected(dx, over):
    with pytest.raises(ValueError):
        SolverConfig(dx=dx, dt=0.5 * dx * dx * over, L=20 * dx * math.ceil(1 / dx))


@pytest.mark.parametrize("kw", [dict(L=10.0), dict(L=30.02), dict(mu=0.0), dict(left_bc="dirichlet"),
                                dict(flux_order=3), dict(advection="weno"), dict(snapshot_stride=-1)])
def test_config_validation(kw):
    with pytest.raises(ValueError):
        SolverConfig(**kw)


def test_refined():
    r = CFG.refined(2)
    assert (r.dx, r.dt, r.snapshot_stride) == (0.025, 2.5e-4, 2000)


def test_cutoff_ramp():
    assert np.array_equal(cutoff([-3.0, -1.0, -0.25, 0.0]), [1.0, 1.0, 0.25, 0.0])


def test_init_cutoff():
    m = constant_medium()
    steady = steady_for_run(m, CFG, 0.0, 0.0)
    s = init_cutoff(m, steady, 0.0, 4, CFG)
    assert s.w[-1] == 0.0 and s.w[0] == pytest.approx(1.0)
    assert np.allclose(s.w[-6:], 4 * -CFG.xi[-6:], atol=1e-9)
    with pytest.raises(ValueError):
        init_cutoff(m, steady, 0.0, 0.5, CFG)


def test_boundary_flux_orders():
    xi = CFG.xi
    w = -2.0 * xi + xi ** 2
    assert boundary_flux(w, CFG) == pytest.approx(-2.0, abs=1e-12)
    first = SolverConfig(dx=0.05, dt=1e-3, L=30, flux_order=1)
    assert boundary_flux(w, first) == pytest.approx(-2.0 - 0.05, abs=1e-12)


def test_invariants(qp_run):
    m, steady, traj = qp_run
    upper = bounds(m)[1]
    assert not traj.violations
    for s in traj.snapshots:
        assert s.w[-1] == 0.0
        assert s.w.min() >= -1e-12 and s.w.max() <= upper * (1 + 1e-9)
    assert traj.final.h >= 10.0
    assert np.all(np.diff(traj.h[traj.t >= 10]) > 0)


def test_step_matches_evolve():
    m = quasi_periodic_medium()
    steady = steady_for_run(m, CFG, 0.0, 5.0)
    s0 = init_cutoff(m, steady, 0.0, 4, CFG)
    s = s0
    for _ in range(20):
        s = step(s, CFG)
    traj = evolve(s0, CFG, stop_t=20 * CFG.dt)
    assert traj.final.h == s.h and np.array_equal(traj.final.w, s.w)


def test_capture_straddles_targets(qp_run):
    m, steady, _ = qp_run
    traj = evolve(init_cutoff(m, steady, -10.0, 4, CFG), CFG, stop_h=0.0, capture=[-5.0, -2.5])
    hs = traj.snapshot_fronts
    for target in (-5.0, -2.5):
        k = int(np.searchsorted(hs, target))
        assert hs[k - 1] < target <= hs[k]
        assert traj.snapshots[k].step == traj.snapshots[k - 1].step + 1


def test_cutoff_ladder_is_ordered():
    m = quasi_periodic_medium()
    steady = steady_for_run(m, CFG, -10.0, 10.0)
    lo = evolve(init_cutoff(m, steady, -10.0, 1, CFG), CFG, stop_t=15.0)
    hi = evolve(init_cutoff(m, steady, -10.0, 4, CFG), CFG, stop_t=15.0)
    rep = compare_ordered(lo, hi)
    assert rep.holds, rep


def test_zero_slope_left_runs():
    m = constant_medium()
    cfg = SolverConfig(dx=0.05, dt=1e-3, L=30, left_bc="zero-slope")
    traj = evolve(init_cutoff(m, steady_for_run(m, cfg, 0, 5), 0.0, 4, cfg), cfg, stop_h=5.0)
    assert not traj.violations
    assert traj.final.w[0] == pytest.approx(traj.final.w[1], abs=1e-3)


def test_rejects_zero_data_and_missing_stop():
    m = constant_medium()
    steady = steady_for_run(m, CFG, 0.0, 0.0)
    s = init_cutoff(m, steady, 0.0, 4, CFG)
    with pytest.raises(ValueError):
        evolve(s, CFG)
    s.w[:] = 0.0
    with pytest.raises(ValueError):
        evolve(s, CFG, stop_t=1.0)
