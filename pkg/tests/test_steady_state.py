import math

import numpy as np
import pytest

from semiwave.media import bounds, constant_medium, periodic_medium, quasi_periodic_medium, shifted
from semiwave.steady_state import (
    SteadyStateError,
    compute_steady_state,
    march_steady,
    steady_residual,
)

DX = 2 * math.pi / 300


def test_constant_is_exact():
    st = compute_steady_state(constant_medium(1.3), 10.0, 0.05, 1e-10)
    assert np.max(np.abs(st.values - 1.3)) <= 1e-8


def test_periodic_bounds_and_residual():
    tol = 1e-10
    st = compute_steady_state(periodic_medium(), 6 * math.pi, DX, tol)
    assert st.residual_norm <= tol
    assert 0.5 <= st.values.min() and st.values.max() <= 1.5
    assert st.sandwich_gap <= 2 * tol


def test_periodic_in_x():
    tol = 1e-10
    st = compute_steady_state(periodic_medium(), 14 * math.pi, DX, tol)
    # the truncated ends are reflective; compare well inside
    x = np.linspace(-4 * math.pi, 4 * math.pi, 801)
    assert np.max(np.abs(st(x + 2 * math.pi) - st(x))) <= 2 * tol


def test_shift_equivariance():
    tol = 1e-10
    m = quasi_periodic_medium()
    k = 137
    s = k * 0.05
    a = compute_steady_state(m, 60.0, 0.05, tol)
    b = compute_steady_state(shifted(m, s), 60.0, 0.05, tol, center=-s)
    # u*_{g(.+s)}(x) = u*_g(x + s)
    x = np.linspace(-20, 20, 801)
    assert np.max(np.abs(b(x - s + 0.0) - a(x))) <= 2 * tol


@pytest.mark.parametrize("factor", [0.5, 2.0])
def test_global_stability(factor):
    """Constant data far below and far above both relax to the same state."""
    m = periodic_medium()
    lo, hi = bounds(m)
    x = -6 * math.pi + DX * np.arange(3601)
    g = m(x)
    ref, _, _ = march_steady(g, hi, DX, 1e-11)
    u0 = factor * (lo if factor < 1 else hi)
    u, res, _ = march_steady(g, u0, DX, 1e-11)
    assert res < 1e-11
    assert np.max(np.abs(u - ref)) < 1e-9


def test_second_order_in_dx():
    m = periodic_medium()
    L = 4 * math.pi
    vals = []
    for n in (100, 200, 400):
        dx = 2 * math.pi / n
        st = compute_steady_state(m, L, dx, 1e-10)
        x = np.linspace(-L / 2, L / 2, 41)
        vals.append(st(x))
    e1 = np.max(np.abs(vals[0] - vals[1]))
    e2 = np.max(np.abs(vals[1] - vals[2]))
    assert 3.5 < e1 / e2 < 4.5


def test_interpolation_and_domain():
    st = compute_steady_state(periodic_medium(), 10.0, 0.05, 1e-9, center=5.0)
    assert st.x[0] == pytest.approx(-5.0) and st.x[-1] == pytest.approx(15.0)
    assert isinstance(st(1.0), float)
    with pytest.raises(Exception):
        st(20.0)


def test_residual_of_constant():
    assert steady_residual(np.full(10, 2.0), 2.0, 0.1) == 0.0


def test_errors():
    with pytest.raises(SteadyStateError):
        compute_steady_state(constant_medium(), 1.0, 0.3)
    with pytest.raises(SteadyStateError):
        compute_steady_state(constant_medium(), 1.0, 0.1, tol=0.0)
