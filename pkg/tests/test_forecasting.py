import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dispatchkit import forecast, mae
from dispatchkit.errors import (
    ConfigInvalid,
    HorizonExceedsData,
    InsufficientHistory,
    LengthMismatch,
)
from dispatchkit.forecasting import ForecasterSpec

from conftest import series


def hourly(days=3, seed=0):
    rng = np.random.default_rng(seed)
    return series(rng.uniform(0.0, 20.0, days * 24))


def test_accurate_returns_actuals():
    s = hourly()
    out = forecast(ForecasterSpec("accurate"), s, 24, 24)
    assert np.array_equal(out, s.values[24:48])
    out[:] = 0.0  # writable copy, not a view into the frozen series
    assert np.array_equal(s.values[24:48], hourly().values[24:48])


def test_noise_reproducible_per_origin():
    s = hourly()
    spec = ForecasterSpec("noise", sigma=1.0, seed=42)
    a = forecast(spec, s, 24, 24)
    b = forecast(spec, s, 24, 24)
    assert np.array_equal(a, b)  # same (seed, t0) -> same draw
    c = forecast(spec, s, 48, 24)
    assert not np.array_equal(a[:24], c[:24])
    d = forecast(ForecasterSpec("noise", sigma=1.0, seed=43), s, 24, 24)
    assert not np.array_equal(a, d)


def test_noise_sigma_zero_is_accurate():
    s = hourly()
    out = forecast(ForecasterSpec("noise", sigma=0.0, seed=1), s, 12, 24)
    assert np.allclose(out, s.values[12:36])


def test_yesterday_shifts_one_day():
    s = hourly()
    out = forecast(ForecasterSpec("yesterday"), s, 24, 24)
    assert np.array_equal(out, s.values[0:24])
    with pytest.raises(InsufficientHistory):
        forecast(ForecasterSpec("yesterday"), s, 23, 1)


@given(
    t0_days=st.integers(min_value=1, max_value=2),
    horizon=st.integers(min_value=1, max_value=24),
    seed=st.integers(min_value=0, max_value=999),
)
@settings(max_examples=40, deadline=None)
def test_mean_one_equals_yesterday(t0_days, horizon, seed):
    s = hourly(days=3, seed=seed)
    t0 = t0_days * 24
    m1 = forecast(ForecasterSpec("mean_n", n_days=1), s, t0, horizon)
    yd = forecast(ForecasterSpec("yesterday"), s, t0, horizon)
    assert np.array_equal(m1, yd)


def test_mean_n_averages_slots():
    s = hourly(days=4, seed=7)
    out = forecast(ForecasterSpec("mean_n", n_days=3), s, 72, 24)
    manual = (s.values[0:24] + s.values[24:48] + s.values[48:72]) / 3.0
    assert np.allclose(out, manual)
    with pytest.raises(InsufficientHistory):
        forecast(ForecasterSpec("mean_n", n_days=3), s, 48, 4)


def test_history_kinds_capped_at_one_day():
    s = hourly(days=4)
    with pytest.raises(HorizonExceedsData):
        forecast(ForecasterSpec("yesterday"), s, 48, 25)


def test_file_kind_uses_provided_series():
    s = hourly()
    provided = s.with_values(s.values + 1.0)
    out = forecast(ForecasterSpec("file"), s, 10, 5, provided=provided)
    assert np.array_equal(out, s.values[10:15] + 1.0)
    with pytest.raises(ConfigInvalid):
        forecast(ForecasterSpec("file"), s, 10, 5)
    off_grid = series(np.ones(len(s)), gran=30)
    with pytest.raises(ConfigInvalid):
        forecast(ForecasterSpec("file"), s, 10, 5, provided=off_grid)


def test_window_bounds_checked():
    s = hourly(days=1)
    with pytest.raises(HorizonExceedsData):
        forecast(ForecasterSpec("accurate"), s, 20, 5)
    with pytest.raises(ConfigInvalid):
        forecast(ForecasterSpec("accurate"), s, 0, 0)


def test_spec_validation_and_flags():
    with pytest.raises(ConfigInvalid):
        ForecasterSpec("psychic")
    with pytest.raises(ConfigInvalid):
        ForecasterSpec("noise", sigma=-1.0)
    with pytest.raises(ConfigInvalid):
        ForecasterSpec("mean_n", n_days=0)
    assert ForecasterSpec("accurate").peeks_at_future
    assert ForecasterSpec("noise").peeks_at_future
    assert not ForecasterSpec("yesterday").peeks_at_future
    assert ForecasterSpec("yesterday").min_history_days == 1
    assert ForecasterSpec("mean_n", n_days=5).min_history_days == 5
    assert ForecasterSpec("accurate").min_history_days == 0


def test_mae():
    assert mae([1.0, 2.0, 3.0], [2.0, 2.0, 1.0]) == pytest.approx(1.0)
    with pytest.raises(LengthMismatch):
        mae([1.0], [1.0, 2.0])
    with pytest.raises(LengthMismatch):
        mae([], [])
