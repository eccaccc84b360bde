"""Minute-resolution time series and the CSV table that backs them.

A Timestamp is a naive datetime truncated to whole minutes.  A
TimeSeries is an immutable float64 vector on a uniform minute grid.
Tables are plain CSV files: first column ``timestamp`` formatted
``YYYY-MM-DDTHH:MM``, remaining columns numeric.  Loading is strict:
gaps, duplicates, disorder and non-finite values are rejected rather
than repaired.
"""

from __future__ import annotations

import csv
import math
import os
from dataclasses import dataclass, field
from datetime import datetime, timedelta

import numpy as np

from .errors import (
    DegenerateRange,
    InsufficientData,
    MissingFile,
    NonFiniteValue,
    NonUniformSpacing,
    OutOfRange,
)

Timestamp = datetime

TS_FORMAT = "%Y-%m-%dT%H:%M"
MINUTES_PER_DAY = 1440


def parse_timestamp(text: str) -> Timestamp:
    """Parse ``YYYY-MM-DDTHH:MM``; anything else raises ValueError."""
    return datetime.strptime(text, TS_FORMAT)


def format_timestamp(ts: Timestamp) -> str:
    return ts.strftime(TS_FORMAT)


def check_timestamp(ts: Timestamp) -> Timestamp:
    """Reject sub-minute components; series live on a minute grid."""
    if ts.second != 0 or ts.microsecond != 0:
        raise OutOfRange(f"timestamp {ts!r} has sub-minute precision")
    return ts


def _as_readonly(values) -> np.ndarray:
    arr = np.asarray(values, dtype=np.float64).copy()
    if arr.ndim != 1:
        raise ValueError("series values must be one-dimensional")
    arr.flags.writeable = False
    return arr


@dataclass(frozen=True)
class TimeSeries:
    """Uniformly spaced float64 samples starting at ``start``.

    granularity_min must divide a day so day-based windows (episodes,
    daily penalties, market schedules) tile the series exactly.
    """

    start: Timestamp
    granularity_min: int
    values: np.ndarray = field(repr=False)
    unit: str = ""

    def __post_init__(self):
        check_timestamp(self.start)
        if self.granularity_min <= 0 or MINUTES_PER_DAY % self.granularity_min != 0:
            raise ValueError(
                f"granularity_min must be a positive divisor of {MINUTES_PER_DAY}, "
                f"got {self.granularity_min}"
            )
        object.__setattr__(self, "values", _as_readonly(self.values))
        if len(self.values) == 0:
            raise ValueError("series must hold at least one value")
        if not np.isfinite(self.values).all():
            bad = int(np.flatnonzero(~np.isfinite(self.values))[0])
            raise NonFiniteValue(f"non-finite value at index {bad}")

    def __len__(self) -> int:
        return len(self.values)

    @property
    def step(self) -> timedelta:
        return timedelta(minutes=self.granularity_min)

    @property
    def end(self) -> Timestamp:
        """First timestamp past the series (exclusive)."""
        return self.start + len(self.values) * self.step

    @property
    def steps_per_day(self) -> int:
        return MINUTES_PER_DAY // self.granularity_min

    def timestamp_at(self, i: int) -> Timestamp:
        return self.start + i * self.step

    def timestamps(self) -> list[Timestamp]:
        return [self.timestamp_at(i) for i in range(len(self.values))]

    def index_of(self, ts: Timestamp) -> int:
        """Index of ``ts``; it must sit exactly on the grid."""
        check_timestamp(ts)
        delta = ts - self.start
        minutes = delta // timedelta(minutes=1)
        q, r = divmod(minutes, self.granularity_min)
        if r != 0:
            raise OutOfRange(f"{format_timestamp(ts)} is off the {self.granularity_min}-minute grid")
        if q < 0 or q >= len(self.values):
            raise OutOfRange(
                f"{format_timestamp(ts)} outside series "
                f"[{format_timestamp(self.start)}, {format_timestamp(self.end)})"
            )
        return int(q)

    def value_at(self, ts: Timestamp) -> float:
        return float(self.values[self.index_of(ts)])

    def with_values(self, values) -> "TimeSeries":
        return TimeSeries(self.start, self.granularity_min, values, self.unit)


def slice_series(series: TimeSeries, start: Timestamp, n: int) -> TimeSeries:
    """n samples beginning at ``start``; the whole window must exist."""
    if n <= 0:
        raise OutOfRange(f"slice length must be positive, got {n}")
    i = series.index_of(start)
    if i + n > len(series):
        raise OutOfRange(
            f"slice of {n} steps from {format_timestamp(start)} runs past series end"
        )
    return TimeSeries(start, series.granularity_min, series.values[i : i + n], series.unit)


@dataclass(frozen=True)
class ScaleParams:
    """Affine map ``scaled = (raw - offset) * gain + lo`` with its inverse."""

    offset: float
    gain: float
    lo: float
    hi: float

    def apply(self, raw):
        return (np.asarray(raw, dtype=np.float64) - self.offset) * self.gain + self.lo

    def invert(self, scaled):
        return (np.asarray(scaled, dtype=np.float64) - self.lo) / self.gain + self.offset


def scale_minmax(series: TimeSeries, lo: float = -1.0, hi: float = 1.0) -> tuple[TimeSeries, ScaleParams]:
    """Rescale so min(values) -> lo and max(values) -> hi.

    Raises DegenerateRange when the series is constant.
    """
    if not lo < hi:
        raise ValueError(f"need lo < hi, got [{lo}, {hi}]")
    vmin = float(series.values.min())
    vmax = float(series.values.max())
    if vmin == vmax:
        raise DegenerateRange(f"constant series (value {vmin}) cannot be min-max scaled")
    params = ScaleParams(offset=vmin, gain=(hi - lo) / (vmax - vmin), lo=lo, hi=hi)
    return series.with_values(params.apply(series.values)), params


def _format_value(x: float) -> str:
    # repr gives the shortest string that round-trips the double
    return repr(float(x))


@dataclass(frozen=True)
class Table:
    """Named columns sharing one time grid."""

    start: Timestamp
    granularity_min: int
    columns: dict[str, TimeSeries]

    def __post_init__(self):
        for name, series in self.columns.items():
            if series.start != self.start or series.granularity_min != self.granularity_min:
                raise ValueError(f"column {name!r} is not on the table grid")
            if len(series) != self.n_rows:
                raise ValueError(f"column {name!r} length differs from the table")

    @property
    def n_rows(self) -> int:
        return len(next(iter(self.columns.values())))

    @property
    def names(self) -> list[str]:
        return list(self.columns)

    def column(self, name: str) -> TimeSeries:
        try:
            return self.columns[name]
        except KeyError:
            raise OutOfRange(f"table has no column {name!r} (have {self.names})") from None

    def write_csv(self, path: str | os.PathLike) -> None:
        names = self.names
        first = self.columns[names[0]]
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["timestamp", *names])
            for i in range(self.n_rows):
                row = [format_timestamp(first.timestamp_at(i))]
                row.extend(_format_value(self.columns[name].values[i]) for name in names)
                writer.writerow(row)


def load_table(path: str | os.PathLike, granularity_min: int | None = None) -> Table:
    """Load a strict CSV table.

    The first column must be named ``timestamp``.  Spacing is inferred
    from the first two rows (or taken from ``granularity_min`` for a
    one-row file) and every subsequent row must land exactly one step
    after its predecessor.
    """
    if not os.path.exists(path):
        raise MissingFile(f"no such file: {path}")
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise InsufficientData(f"{path}: empty file") from None
        if not header or header[0] != "timestamp":
            raise NonUniformSpacing(f"{path}: first column must be 'timestamp', got {header[:1]}")
        names = header[1:]
        if not names:
            raise InsufficientData(f"{path}: no value columns")
        stamps: list[Timestamp] = []
        cols: list[list[float]] = [[] for _ in names]
        for lineno, row in enumerate(reader, start=2):
            if len(row) != len(names) + 1:
                raise NonUniformSpacing(f"{path}:{lineno}: expected {len(names) + 1} fields, got {len(row)}")
            try:
                ts = parse_timestamp(row[0])
            except ValueError:
                raise NonUniformSpacing(f"{path}:{lineno}: bad timestamp {row[0]!r}") from None
            stamps.append(ts)
            for j, cell in enumerate(row[1:]):
                try:
                    x = float(cell)
                except ValueError:
                    raise NonFiniteValue(f"{path}:{lineno}: not a number: {cell!r}") from None
                if not math.isfinite(x):
                    raise NonFiniteValue(f"{path}:{lineno}: non-finite value {cell!r}")
                cols[j].append(x)
    if not stamps:
        raise InsufficientData(f"{path}: no data rows")
    if len(stamps) == 1:
        if granularity_min is None:
            raise InsufficientData(f"{path}: one row and no explicit granularity")
        gran = granularity_min
    else:
        gran = int((stamps[1] - stamps[0]) // timedelta(minutes=1))
        if gran <= 0:
            raise NonUniformSpacing(f"{path}:3: timestamps not increasing")
        if granularity_min is not None and granularity_min != gran:
            raise NonUniformSpacing(
                f"{path}: spacing {gran} min does not match requested {granularity_min} min"
            )
    step = timedelta(minutes=gran)
    for i in range(1, len(stamps)):
        if stamps[i] - stamps[i - 1] != step:
            raise NonUniformSpacing(
                f"{path}:{i + 2}: expected {format_timestamp(stamps[i - 1] + step)}, "
                f"got {format_timestamp(stamps[i])}"
            )
    columns = {
        name: TimeSeries(stamps[0], gran, np.asarray(col)) for name, col in zip(names, cols)
    }
    return Table(stamps[0], gran, columns)
