import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from semiwave.diagnostics import (
    AlmostPeriods,
    DiagnosticsError,
    SpeedLaw,
    almost_period_scan,
    average_speed,
    average_speed_trend,
    period_defect,
    rho,
)

XI = np.linspace(-10, 0, 201)
DX = XI[1] - XI[0]


def _shape(x):
    return np.tanh(-x)


@given(st.floats(0.05, 1.0))
def test_rho_of_scaled_profile(a):
    v2 = _shape(XI)
    assert rho(a * v2, v2, DX) == pytest.approx(a, rel=1e-12)


def test_rho_sees_boundary_slope():
    v2 = _shape(XI)
    v1 = v2.copy()
    # same interior ratio, flatter at the front
    v1[-2] *= 0.5
    v1[-3] *= 0.5
    assert rho(v1, v2, DX) < 0.6


def test_rho_needs_positive_denominator():
    v2 = _shape(XI)
    v2[3] = 0.0
    with pytest.raises(DiagnosticsError):
        rho(v2, v2, DX)


def test_speed_law_validation():
    with pytest.raises(DiagnosticsError):
        SpeedLaw(np.array([0.0, 1.0, 1.0]), np.ones(3))
    law = SpeedLaw(np.array([0.0, 1.0, 2.0]), np.array([1.0, 2.0, 1.0]))
    assert law(0.5) == 1.5
    with pytest.raises(DiagnosticsError):
        law(3.0)


def test_average_speed_is_harmonic_mean():
    h = np.linspace(0, 10, 10001)
    f = 1.0 + 0.5 * np.sin(2 * math.pi * h)
    law = SpeedLaw(h, f)
    # harmonic mean of 1 + 0.5 sin over a period: sqrt(1 - 0.25)
    assert average_speed(law, 0, 10) == pytest.approx(math.sqrt(0.75), rel=1e-6)
    assert average_speed(SpeedLaw(h, np.full_like(h, 0.3)), 2.0, 7.0) == pytest.approx(0.3)
    with pytest.raises(DiagnosticsError):
        average_speed(law, -1, 5)


def test_period_defect():
    h = np.linspace(0, 30, 30001)
    law = SpeedLaw(h, 1 + 0.2 * np.cos(h))
    assert period_defect(law, 2 * math.pi) < 1e-6
    assert period_defect(law, 3.0) > 0.1


def test_average_speed_trend():
    h = np.linspace(0, 100, 100001)
    law = SpeedLaw(h, 1 + 0.2 * np.cos(h) + 0.1 * np.cos(math.sqrt(2) * h))
    trend = average_speed_trend(law, 0.0, [10, 20, 40, 80])
    assert trend.differences.size == 3 and trend.contraction > 0
    flat = average_speed_trend(SpeedLaw(h, np.full_like(h, 0.5)), 0.0, [10, 20, 40])
    assert flat.contraction == math.inf


def test_almost_periods_of_periodic_signal():
    d = 0.05
    x = np.arange(0, 200, d)
    ap = almost_period_scan(np.sin(x), 0.02, d * np.arange(1, 801), d)
    q = ap.qualifying
    assert np.any(np.abs(q - 2 * math.pi) < 0.06)
    assert ap.max_gap < 7.0


def test_almost_period_scan_multidimensional():
    d = 0.1
    x = np.arange(0, 100, d)
    F = np.stack([np.sin(x), np.cos(x)], axis=1)
    ap = almost_period_scan(F, 0.05, [2 * math.pi, 3.0], d)
    assert ap.sup_diff[0] < 0.05 < ap.sup_diff[1]


def test_scan_needs_long_window():
    with pytest.raises(DiagnosticsError):
        almost_period_scan(np.zeros(100), 0.1, [30.0], 1.0)


def test_max_gap_counts_tail():
    ap = AlmostPeriods(np.array([1.0, 2.0, 3.0, 10.0]), np.array([0.0, 1.0, 1.0, 1.0]), 0.5)
    assert ap.max_gap == 9.0
    assert AlmostPeriods(np.array([1.0]), np.array([1.0]), 0.5).max_gap == math.inf
