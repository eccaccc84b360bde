"""Forecasters for driving planners ahead of realized data.

All forecasters answer the same question: from position t0 in a series,
what do the next ``horizon`` values look like?  Oracle kinds (accurate,
noise) peek at the actuals and are only legitimate inside simulations;
history kinds (yesterday, mean_n) read strictly before t0; the file
kind returns values produced elsewhere.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import (
    ConfigInvalid,
    HorizonExceedsData,
    InsufficientHistory,
    LengthMismatch,
)
from .timeseries import TimeSeries

KIND_ACCURATE = "accurate"
KIND_NOISE = "noise"
KIND_YESTERDAY = "yesterday"
KIND_MEAN_N = "mean_n"
KIND_FILE = "file"

_KINDS = (KIND_ACCURATE, KIND_NOISE, KIND_YESTERDAY, KIND_MEAN_N, KIND_FILE)


@dataclass(frozen=True)
class ForecasterSpec:
    kind: str = KIND_ACCURATE
    sigma: float = 0.0
    n_days: int = 10
    seed: int = 0

    def __post_init__(self):
        if self.kind not in _KINDS:
            raise ConfigInvalid(f"unknown forecaster kind {self.kind!r}")
        if self.kind == KIND_NOISE and self.sigma < 0:
            raise ConfigInvalid("noise sigma must be >= 0")
        if self.kind == KIND_MEAN_N and self.n_days < 1:
            raise ConfigInvalid("mean_n needs n_days >= 1")

    @property
    def peeks_at_future(self) -> bool:
        return self.kind in (KIND_ACCURATE, KIND_NOISE)

    @property
    def min_history_days(self) -> int:
        if self.kind == KIND_YESTERDAY:
            return 1
        if self.kind == KIND_MEAN_N:
            return self.n_days
        return 0


def forecast(
    spec: ForecasterSpec,
    series: TimeSeries,
    t0: int,
    horizon: int,
    provided: TimeSeries | None = None,
) -> np.ndarray:
    """Forecast values for indices [t0, t0 + horizon) of ``series``.

    History-based kinds never read at or past t0 and are limited to one
    day of lookahead.  The noise forecaster reseeds per (seed, t0), so
    repeating a call reproduces the same draw no matter which execution
    path asks.
    """
    if horizon < 1:
        raise ConfigInvalid(f"horizon must be >= 1, got {horizon}")
    if t0 < 0 or t0 + horizon > len(series):
        raise HorizonExceedsData(
            f"window [{t0}, {t0 + horizon}) outside series of {len(series)} steps"
        )
    spd = series.steps_per_day

    if spec.kind == KIND_ACCURATE:
        return series.values[t0 : t0 + horizon].copy()

    if spec.kind == KIND_NOISE:
        rng = np.random.default_rng(np.random.SeedSequence([spec.seed, t0]))
        return series.values[t0 : t0 + horizon] + rng.normal(0.0, spec.sigma, size=horizon)

    if spec.kind == KIND_FILE:
        if provided is None:
            raise ConfigInvalid("file forecaster needs a provided forecast series")
        if provided.granularity_min != series.granularity_min or provided.start != series.start:
            raise ConfigInvalid("provided forecast series is not on the actuals grid")
        if t0 + horizon > len(provided):
            raise HorizonExceedsData("provided forecast series too short for window")
        return provided.values[t0 : t0 + horizon].copy()

    if horizon > spd:
        raise HorizonExceedsData(
            f"{spec.kind} forecaster supports at most one day ({spd} steps) of lookahead"
        )

    if spec.kind == KIND_YESTERDAY:
        if t0 < spd:
            raise InsufficientHistory(f"yesterday forecaster needs {spd} steps of history")
        return series.values[t0 - spd : t0 - spd + horizon].copy()

    # mean_n: slot-wise mean over the previous n days
    need = spec.n_days * spd
    if t0 < need:
        raise InsufficientHistory(
            f"mean_n({spec.n_days}) needs {need} steps of history, have {t0}"
        )
    stack = np.stack(
        [series.values[t0 - d * spd : t0 - d * spd + horizon] for d in range(1, spec.n_days + 1)]
    )
    return stack.mean(axis=0)


def mae(forecasted, actual) -> float:
    """Mean absolute error between two equal-length vectors."""
    f = np.asarray(forecasted, dtype=np.float64)
    a = np.asarray(actual, dtype=np.float64)
    if f.shape != a.shape or f.ndim != 1:
        raise LengthMismatch(f"shapes differ: {f.shape} vs {a.shape}")
    if len(f) == 0:
        raise LengthMismatch("mae needs at least one sample")
    return float(np.mean(np.abs(f - a)))
