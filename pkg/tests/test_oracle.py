"""Homogeneous front speed. The frozen value comes from the shooting solver and
is cross-checked here against an independent adaptive integration."""
import math

import numpy as np
import pytest
from scipy.integrate import solve_ivp
from scipy.optimize import brentq

from semiwave.oracle import OracleError, exit_rate, shoot_profile, solve_speed

C_UNIT = 0.36437072332817433


def _independent_speed(a0, mu):
    """Shooting with scipy's DOP853 and event detection, no shared code."""

    def slope_at_front(c):
        lam = 0.5 * (-c + math.sqrt(c * c + 4 * a0))
        d = 1e-7

        def rhs(_, y):
            return [y[1], -c * y[1] - y[0] * (a0 - y[0])]

        def hit(_, y):
            return y[0]

        hit.terminal = True
        hit.direction = -1
        sol = solve_ivp(rhs, (0, 200), [a0 - d, -lam * d], method="DOP853",
                        rtol=1e-12, atol=1e-14, events=hit)
        if not sol.t_events[0].size:
            return 0.0
        return sol.y_events[0][0][1]

    return brentq(lambda c: -mu * slope_at_front(c) - c, 1e-3, 2 * math.sqrt(a0) - 1e-9, xtol=1e-12)


def test_frozen_unit_speed():
    r = solve_speed(1.0, 1.0)
    assert r.c == pytest.approx(C_UNIT, abs=1e-10)
    assert r.residual < 1e-9


def test_independent_cross_check():
    assert _independent_speed(1.0, 1.0) == pytest.approx(C_UNIT, abs=1e-6)
    assert _independent_speed(2.0, 0.5) == pytest.approx(solve_speed(2.0, 0.5).c, abs=1e-6)


def test_speed_monotone_in_mu_and_below_kpp():
    cs = [solve_speed(1.0, mu).c for mu in (0.5, 1.0, 2.0, 10.0, 100.0)]
    assert np.all(np.diff(cs) > 0)
    assert cs[-1] < 2.0 and cs[-1] > 1.4


def test_scaling_in_a0():
    # q(xi) = a p(sqrt(a) xi) maps the unit problem onto rate a with mu -> a mu
    a = 2.25
    assert solve_speed(a, 1.0).c == pytest.approx(math.sqrt(a) * solve_speed(1.0, a).c, rel=1e-8)


def test_profile_shape():
    xi, q, dq, slope0 = shoot_profile(1.0, C_UNIT)
    assert xi[-1] == pytest.approx(0.0, abs=1e-12)
    assert q[-1] == pytest.approx(0.0, abs=1e-12)
    assert np.all(np.diff(q) < 0)
    assert np.all((q[:-1] > 0) & (q[:-1] < 1))
    assert -slope0 == pytest.approx(C_UNIT, rel=1e-9)


def test_exit_rate_solves_characteristic():
    for a0, c in [(1.0, 0.3), (2.0, 1.1)]:
        lam = exit_rate(a0, c)
        assert lam > 0
        assert lam * lam + c * lam - a0 == pytest.approx(0.0, abs=1e-12)


def test_errors():
    with pytest.raises(OracleError):
        shoot_profile(1.0, 2.5)
    with pytest.raises((OracleError, ValueError)):
        solve_speed(-1.0, 1.0)
