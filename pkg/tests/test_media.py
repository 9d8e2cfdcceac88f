import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from semiwave.media import (
    MediumError,
    QuasiPeriodicMedium,
    bounds,
    constant_medium,
    evaluate,
    format_medium,
    parse_medium,
    periodic_medium,
    quasi_periodic_medium,
    shifted,
)

modes = st.lists(
    st.tuples(st.floats(0, 0.4), st.floats(0.1, 5), st.floats(-4, 4)), max_size=4
)


@st.composite
def media(draw):
    m = tuple(draw(modes))
    base = sum(a for a, _, _ in m) + draw(st.floats(0.05, 3))
    return QuasiPeriodicMedium(base, m, draw(st.floats(-10, 10)))


def test_defaults():
    assert constant_medium()(3.7) == 1.0
    x = np.linspace(-5, 5, 11)
    assert np.allclose(periodic_medium()(x), 1 + 0.5 * np.sin(x), atol=1e-15)
    q = quasi_periodic_medium()
    assert np.allclose(q(x), 1.5 + 0.3 * np.cos(x) + 0.2 * np.cos(math.sqrt(2) * x))
    assert bounds(q) == pytest.approx((1.0, 2.0))


def test_scalar_in_scalar_out():
    assert isinstance(evaluate(periodic_medium(), 0.3), float)
    assert evaluate(periodic_medium(), np.zeros((2, 3))).shape == (2, 3)


@given(media(), st.floats(-50, 50), st.floats(-20, 20))
def test_shift_is_translation(m, x, s):
    assert shifted(m, s)(x) == pytest.approx(m(x + s), abs=1e-9)


@given(media())
def test_format_parse_round_trip(m):
    assert parse_medium(format_medium(m)) == m


@given(media())
@settings(max_examples=30)
def test_bounds_bracket_samples(m):
    lo, hi = bounds(m)
    v = m(np.linspace(-100, 100, 2001))
    assert lo - 1e-12 <= v.min() and v.max() <= hi + 1e-12


def test_mode_tables_reproduce_values():
    m = quasi_periodic_medium()
    xi = np.linspace(-40, 0, 801)
    amps, freqs, c, s = m.mode_tables(xi)
    h = 12.345
    ch, sh = np.cos(freqs * h), np.sin(freqs * h)
    c = c.reshape(len(amps), -1)
    s = s.reshape(len(amps), -1)
    g = m.base + np.sum(amps[:, None] * (c * ch[:, None] - s * sh[:, None]), axis=0)
    assert np.allclose(g, m(xi + h), atol=1e-13)


@pytest.mark.parametrize("text", ["", "mode=1,1,0", "base=1; mode=1,1", "base=x", "base=1; foo=2"])
def test_parse_errors(text):
    with pytest.raises(MediumError):
        parse_medium(text)


def test_named_constants():
    assert parse_medium("base=1; mode=0.5,1,-pi/2") == periodic_medium()
    assert parse_medium("base=1.5; mode=0.3,1,0; mode=0.2,sqrt2,0") == quasi_periodic_medium()


def test_invalid_media():
    with pytest.raises(MediumError):
        QuasiPeriodicMedium(1.0, ((-0.1, 1.0, 0.0),))
    with pytest.raises(MediumError):
        QuasiPeriodicMedium(1.0, ((0.1, 0.0, 0.0),))
    with pytest.raises(MediumError):
        bounds(QuasiPeriodicMedium(0.5, ((0.5, 1.0, 0.0),)))
