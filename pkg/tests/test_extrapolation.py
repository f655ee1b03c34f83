import pytest
from hypothesis import given
from hypothesis import strategies as st

from fisherinfo.extrapolation import DEFAULT_T_VALUES, KINKED_POWERS, geometric_sweep, richardson_limit


def test_default_sweep():
    assert DEFAULT_T_VALUES == pytest.approx([0.1 * 2.0**-k for k in range(7)])


@given(st.floats(-5, 5), st.floats(-5, 5), st.floats(-5, 5))
def test_exact_for_quadratic_model(limit, c1, c2):
    t = geometric_sweep()
    v = [limit + c1 * x + c2 * x * x for x in t]
    assert richardson_limit(t, v) == pytest.approx(limit, abs=1e-9)


@given(st.floats(-5, 5), st.floats(-5, 5), st.floats(-5, 5))
def test_exact_for_half_power_model(limit, c1, c2):
    t = geometric_sweep()
    v = [limit + c1 * x**0.5 + c2 * x for x in t]
    assert richardson_limit(t, v, KINKED_POWERS) == pytest.approx(limit, abs=1e-9)


def test_uses_smallest_parameters():
    t = [0.4, 0.2, 0.1, 0.05]
    v = [100.0, 1 + 0.2, 1 + 0.1, 1 + 0.05]
    assert richardson_limit(t, v) == pytest.approx(1.0)


def test_needs_enough_points():
    with pytest.raises(ValueError):
        richardson_limit([0.1, 0.05], [1.0, 1.0])
