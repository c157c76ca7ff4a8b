import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from squeezecycle.analysis_fits import finite_time_exponent, finite_time_points, fit_power_law
from squeezecycle.closed_forms import kz_exponent_b
from squeezecycle.errors import DomainError


def test_exact_power_law():
    xs = np.geomspace(1.0, 500.0, 8)
    fit = fit_power_law([(x, 7.0 * x ** (-2 / 3)) for x in xs])
    assert fit.exponent == pytest.approx(2 / 3, abs=1e-10)
    assert fit.prefactor == pytest.approx(7.0, rel=1e-10)
    assert fit.slope == -fit.exponent
    assert fit.r_squared == pytest.approx(1.0, abs=1e-12)
    assert fit.sample_count == 8 and fit.window == (1.0, 500.0)


def test_noisy_power_law():
    rng = np.random.default_rng(12345)
    xs = np.geomspace(10.0, 1000.0, 20)
    ys = xs**-0.5 * (1 + 0.01 * rng.standard_normal(xs.size))
    assert fit_power_law(zip(xs, ys)).exponent == pytest.approx(0.5, abs=0.02)


def test_window_selects_points():
    pts = [(x, x**-1.0) for x in (1, 2, 4, 8)] + [(x, 5.0) for x in (100, 200)]
    fit = fit_power_law(pts, window=(1, 10))
    assert fit.sample_count == 4 and fit.exponent == pytest.approx(1.0, abs=1e-12)


@pytest.mark.parametrize("pts", [
    [(1, 1), (2, 2), (3, 3)],
    [(1, 1), (2, 0), (3, 3), (4, 4)],
    [(1, 1), (-2, 2), (3, 3), (4, 4)],
    [(1, 1), (2, math.inf), (3, 3), (4, 4)],
])
def test_rejects_bad_data(pts):
    with pytest.raises(DomainError):
        fit_power_law(pts)


@given(st.floats(1e-3, 1e3), st.floats(-3.0, 3.0))
def test_scale_equivariance(c, b):
    xs = np.geomspace(2.0, 300.0, 6)
    ys = 1.7 * xs**-b * (1 + 0.05 * np.sin(xs))
    base = fit_power_law(zip(xs, ys))
    scaled = fit_power_law(zip(xs, c * ys))
    assert scaled.exponent == pytest.approx(base.exponent, abs=1e-12)
    assert scaled.prefactor == pytest.approx(c * base.prefactor, rel=1e-10)
    assert 0.0 <= base.r_squared <= 1.0


def test_mean_field_residual_exponent():
    taus = np.geomspace(100.0, 1000.0, 8)
    assert all(gap > 0 for _, gap in finite_time_points(1.0, taus))
    fit = finite_time_exponent(1.0, taus)
    assert fit.exponent == pytest.approx(kz_exponent_b(0.5, 1.0), rel=0.1)
