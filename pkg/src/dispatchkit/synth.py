"""Deterministic synthetic data for demos and tests.

All generators are pure functions of their arguments (seeded numpy
generators), so any table can be regenerated bit-identically.
"""

from __future__ import annotations

import numpy as np

from .timeseries import Table, TimeSeries, parse_timestamp

DEFAULT_START = "2024-01-01T00:00"


def square_wave_day(steps_per_day: int, low: float, high: float) -> np.ndarray:
    """First half of the day at ``low``, second half at ``high``."""
    half = steps_per_day // 2
    day = np.full(steps_per_day, high, dtype=np.float64)
    day[:half] = low
    return day


def _daily_profile(spd: int, phase: float, sharpness: float = 1.0) -> np.ndarray:
    x = np.arange(spd) / spd
    return 0.5 * (1.0 + np.sin(2.0 * np.pi * (x - phase)) * sharpness)


def make_ea_table(
    days: int,
    granularity_min: int = 60,
    seed: int = 0,
    start: str = DEFAULT_START,
    price_base: float = 10.0,
    price_swing: float = 8.0,
    noise: float = 0.5,
) -> Table:
    """Price peaking in the evening, carbon peaking against it.

    The deliberate anti-correlation gives cost/carbon trade-off sweeps
    an actual frontier to walk.
    """
    rng = np.random.default_rng(seed)
    spd = 1440 // granularity_min
    t0 = parse_timestamp(start)
    prof = _daily_profile(spd, phase=0.3)
    price = np.concatenate(
        [price_base + price_swing * (prof - 0.5) * 2.0 + rng.normal(0, noise, spd) for _ in range(days)]
    )
    carbon_prof = _daily_profile(spd, phase=0.8)
    carbon = np.concatenate(
        [2.0 + 1.5 * (carbon_prof - 0.5) * 2.0 + rng.normal(0, noise * 0.2, spd) for _ in range(days)]
    )
    return Table(
        t0,
        granularity_min,
        {
            "price": TimeSeries(t0, granularity_min, price, unit="ccy/kWh"),
            "carbon": TimeSeries(t0, granularity_min, np.maximum(0.05, carbon), unit="kg/kWh"),
        },
    )


def make_mg_table(
    days: int,
    granularity_min: int = 60,
    seed: int = 0,
    start: str = DEFAULT_START,
    solar_peak_kw: float = 8.0,
    demand_base_kw: float = 3.0,
) -> Table:
    """Adds a midday solar bell and a two-peak demand curve."""
    base = make_ea_table(days, granularity_min, seed=seed, start=start)
    rng = np.random.default_rng(seed + 1)
    spd = 1440 // granularity_min
    t0 = parse_timestamp(start)
    x = np.arange(spd) / spd
    bell = np.exp(-0.5 * ((x - 0.5) / 0.13) ** 2)
    solar = np.concatenate(
        [np.maximum(0.0, solar_peak_kw * bell + rng.normal(0, 0.2, spd)) for _ in range(days)]
    )
    peaks = 1.0 + 0.8 * np.exp(-0.5 * ((x - 0.33) / 0.07) ** 2) + 1.2 * np.exp(
        -0.5 * ((x - 0.8) / 0.07) ** 2
    )
    demand = np.concatenate(
        [np.maximum(0.2, demand_base_kw * peaks + rng.normal(0, 0.15, spd)) for _ in range(days)]
    )
    cols = dict(base.columns)
    cols["solar"] = TimeSeries(t0, granularity_min, solar, unit="kW")
    cols["demand"] = TimeSeries(t0, granularity_min, demand, unit="kW")
    return Table(t0, granularity_min, cols)


def make_bo_table(
    days: int,
    granularity_min: int = 15,
    seed: int = 0,
    start: str = DEFAULT_START,
    solar_peak_kw: float = 60.0,
    wind_mean_kw: float = 25.0,
    demand_base_kw: float = 20.0,
) -> Table:
    """Two market prices plus solar, wind and demand at slot granularity."""
    rng = np.random.default_rng(seed)
    spd = 1440 // granularity_min
    t0 = parse_timestamp(start)
    x = np.arange(spd) / spd
    prof = _daily_profile(spd, phase=0.3)

    dam = np.concatenate([4.0 + 2.5 * (prof - 0.5) * 2.0 + rng.normal(0, 0.15, spd) for _ in range(days)])
    rtm = dam + rng.normal(0, 0.4, days * spd)  # realtime tracks day-ahead, noisier
    bell = np.exp(-0.5 * ((x - 0.5) / 0.13) ** 2)
    solar = np.concatenate(
        [np.maximum(0.0, solar_peak_kw * bell + rng.normal(0, 1.5, spd)) for _ in range(days)]
    )
    wind = np.maximum(0.0, wind_mean_kw + rng.normal(0, 6.0, days * spd))
    peaks = 1.0 + 0.6 * np.exp(-0.5 * ((x - 0.35) / 0.08) ** 2) + 0.9 * np.exp(
        -0.5 * ((x - 0.82) / 0.08) ** 2
    )
    demand = np.concatenate(
        [np.maximum(1.0, demand_base_kw * peaks + rng.normal(0, 0.8, spd)) for _ in range(days)]
    )
    return Table(
        t0,
        granularity_min,
        {
            "dam_price": TimeSeries(t0, granularity_min, dam, unit="ccy/kWh"),
            "rtm_price": TimeSeries(t0, granularity_min, rtm, unit="ccy/kWh"),
            "solar": TimeSeries(t0, granularity_min, solar, unit="kW"),
            "wind": TimeSeries(t0, granularity_min, np.minimum(wind, 2.2 * wind_mean_kw), unit="kW"),
            "demand": TimeSeries(t0, granularity_min, demand, unit="kW"),
        },
    )


def make_square_price_table(
    days: int,
    granularity_min: int = 60,
    low: float = 2.0,
    high: float = 10.0,
    start: str = DEFAULT_START,
) -> Table:
    """Noise-free square-wave price: cheap mornings, dear evenings."""
    spd = 1440 // granularity_min
    t0 = parse_timestamp(start)
    day = square_wave_day(spd, low, high)
    price = np.tile(day, days)
    return Table(
        t0,
        granularity_min,
        {"price": TimeSeries(t0, granularity_min, price, unit="ccy/kWh")},
    )
