"""Time-series data model, CSV ingestion, and sliding-window split planning.

A :class:`TimeSeries` couples a strictly regular timestamp grid with one
real-valued target column and any number of named covariate columns
(numeric or categorical).  All containers are immutable after
construction; every operation returns a new object.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from .errors import DataError

NUMERIC = "numeric"
CATEGORICAL = "categorical"

# How a covariate column is collapsed over a training window.
AGG_SUM = "sum"
AGG_MODE = "mode"
AGG_LAST = "last"

DATE_PARTS = ("day", "month", "year", "weekday")

MISSING_CATEGORY = "__missing__"


def parse_timestamp(text: str) -> np.datetime64:
    """Parse an ISO-8601 date or timestamp (YYYY-MM-DD[( |T)HH:MM:SS])."""
    cleaned = text.strip().replace(" ", "T")
    try:
        return np.datetime64(cleaned, "s")
    except ValueError as exc:
        raise DataError(f"unparseable date {text!r}: {exc}") from exc


def _format_timestamp(value: np.datetime64) -> str:
    return np.datetime_as_string(value, unit="s")


@dataclass(frozen=True)
class Covariate:
    """One named covariate column plus its window-aggregation rule."""

    name: str
    kind: str
    values: np.ndarray
    aggregate: str = ""

    def __post_init__(self) -> None:
        if self.kind not in (NUMERIC, CATEGORICAL):
            raise DataError(f"covariate {self.name!r}: unknown kind {self.kind!r}")
        default_agg = AGG_SUM if self.kind == NUMERIC else AGG_MODE
        agg = self.aggregate or default_agg
        if self.kind == NUMERIC and agg not in (AGG_SUM, AGG_LAST):
            raise DataError(f"covariate {self.name!r}: invalid aggregate {agg!r}")
        if self.kind == CATEGORICAL and agg != AGG_MODE:
            raise DataError(f"covariate {self.name!r}: categorical columns aggregate by mode")
        object.__setattr__(self, "aggregate", agg)
        if self.kind == NUMERIC:
            values = np.asarray(self.values, dtype=np.float64)
            if not np.all(np.isfinite(values)):
                raise DataError(f"covariate {self.name!r}: non-finite numeric value")
        else:
            values = np.asarray(self.values, dtype=object)
            for v in values:
                if not isinstance(v, str) or not v:
                    raise DataError(f"covariate {self.name!r}: categorical values must be non-empty strings")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    def take(self, index: slice | np.ndarray) -> "Covariate":
        return Covariate(self.name, self.kind, np.asarray(self.values[index]), self.aggregate)


@dataclass(frozen=True)
class TimeSeries:
    """Timestamped univariate target with named covariate columns.

    Invariants, enforced at construction: timestamps strictly increasing on
    a constant step; target and every covariate have the same length as the
    timestamps; target values are finite.
    """

    timestamps: np.ndarray
    target: np.ndarray
    covariates: tuple[Covariate, ...] = ()

    def __post_init__(self) -> None:
        ts = np.asarray(self.timestamps, dtype="datetime64[s]")
        target = np.asarray(self.target, dtype=np.float64)
        if ts.size == 0:
            raise DataError("series must contain at least one row")
        if target.shape != ts.shape:
            raise DataError("target length does not match timestamps")
        if not np.all(np.isfinite(target)):
            raise DataError("target contains a missing or non-finite value")
        if ts.size > 1:
            deltas = np.diff(ts)
            if np.any(deltas <= np.timedelta64(0, "s")):
                i = int(np.argmax(deltas <= np.timedelta64(0, "s")))
                if deltas[i] == np.timedelta64(0, "s"):
                    raise DataError(f"duplicate timestamp {_format_timestamp(ts[i + 1])}")
                raise DataError(f"timestamps not increasing at {_format_timestamp(ts[i + 1])}")
            if np.any(deltas != deltas[0]):
                i = int(np.argmax(deltas != deltas[0]))
                raise DataError(
                    "non-constant time step: gap between "
                    f"{_format_timestamp(ts[i])} and {_format_timestamp(ts[i + 1])} "
                    f"(expected {deltas[0]})"
                )
        for cov in self.covariates:
            if len(cov.values) != ts.size:
                raise DataError(f"covariate {cov.name!r} length does not match timestamps")
        names = [c.name for c in self.covariates]
        if len(set(names)) != len(names):
            raise DataError("duplicate covariate names")
        ts.setflags(write=False)
        target.setflags(write=False)
        object.__setattr__(self, "timestamps", ts)
        object.__setattr__(self, "target", target)
        object.__setattr__(self, "covariates", tuple(self.covariates))

    def __len__(self) -> int:
        return int(self.timestamps.size)

    @property
    def delta(self) -> np.timedelta64:
        if len(self) < 2:
            raise DataError("step is undefined for a single-row series")
        return self.timestamps[1] - self.timestamps[0]

    def covariate(self, name: str) -> Covariate:
        for cov in self.covariates:
            if cov.name == name:
                return cov
        raise KeyError(name)

    def take(self, index: slice) -> "TimeSeries":
        return TimeSeries(
            np.asarray(self.timestamps[index]),
            np.asarray(self.target[index]),
            tuple(c.take(index) for c in self.covariates),
        )

    def append(self, other: "TimeSeries") -> "TimeSeries":
        """Concatenate a contiguous continuation of this series."""
        if tuple(c.name for c in other.covariates) != tuple(c.name for c in self.covariates):
            raise DataError("appended rows carry different covariate columns")
        merged = [
            Covariate(a.name, a.kind, np.concatenate([np.asarray(a.values), np.asarray(b.values)]), a.aggregate)
            for a, b in zip(self.covariates, other.covariates)
        ]
        return TimeSeries(
            np.concatenate([self.timestamps, other.timestamps]),
            np.concatenate([self.target, other.target]),
            tuple(merged),
        )


@dataclass(frozen=True)
class StandardizationParams:
    """Affine map (x - mean) / std_dev and its inverse."""

    mean: float
    std_dev: float

    def __post_init__(self) -> None:
        if not (self.std_dev > 0):
            raise DataError("std_dev must be strictly positive")

    def apply(self, values: np.ndarray) -> np.ndarray:
        return (np.asarray(values, dtype=np.float64) - self.mean) / self.std_dev

    def invert(self, values: np.ndarray) -> np.ndarray:
        return np.asarray(values, dtype=np.float64) * self.std_dev + self.mean


@dataclass(frozen=True)
class WindowSplit:
    """One (train, predict) slice: n train points immediately followed by m."""

    train_start: int
    n: int
    m: int

    def __post_init__(self) -> None:
        if self.train_start < 0 or self.n < 2 or self.m < 1:
            raise DataError(f"invalid split ({self.train_start}, n={self.n}, m={self.m})")

    @property
    def train_range(self) -> range:
        return range(self.train_start, self.train_start + self.n)

    @property
    def predict_range(self) -> range:
        return range(self.train_start + self.n, self.train_start + self.n + self.m)

    @property
    def stop(self) -> int:
        return self.train_start + self.n + self.m


@dataclass(frozen=True)
class SplitPlan:
    n: int
    m: int
    stride: int
    splits: tuple[WindowSplit, ...]


@dataclass(frozen=True)
class ColumnSchema:
    """Role assignment for the columns of an input CSV file."""

    date: str
    target: str
    numeric: tuple[str, ...] = ()
    categorical: tuple[str, ...] = ()

    def __post_init__(self) -> None:
        names = [self.date, self.target, *self.numeric, *self.categorical]
        if len(set(names)) != len(names):
            raise DataError("schema assigns one column to more than one role")

    @property
    def columns(self) -> tuple[str, ...]:
        return (self.date, self.target, *self.numeric, *self.categorical)


def ingest_csv(path: str | Path, schema: ColumnSchema) -> TimeSeries:
    """Read and validate a CSV file into a :class:`TimeSeries`.

    The file must be UTF-8 with a header row naming every schema column.
    Rows are sorted by timestamp; duplicate timestamps and irregular steps
    are hard errors.
    """
    path = Path(path)
    if not path.exists():
        raise DataError(f"data file not found: {path}")
    with path.open(newline="", encoding="utf-8") as handle:
        reader = csv.reader(handle)
        try:
            header = next(reader)
        except StopIteration:
            raise DataError(f"{path}: empty file (header row required)") from None
        header = [h.strip() for h in header]
        missing = [c for c in schema.columns if c not in header]
        if missing:
            raise DataError(f"{path}: missing columns {missing}")
        undeclared = [c for c in header if c not in schema.columns]
        if undeclared:
            raise DataError(f"{path}: columns {undeclared} not declared in the schema")
        index = {name: header.index(name) for name in schema.columns}

        timestamps: list[np.datetime64] = []
        target: list[float] = []
        numeric: dict[str, list[float]] = {name: [] for name in schema.numeric}
        categorical: dict[str, list[str]] = {name: [] for name in schema.categorical}
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != len(header):
                raise DataError(f"{path}:{lineno}: expected {len(header)} fields, got {len(row)}")
            timestamps.append(parse_timestamp(row[index[schema.date]]))
            target.append(_parse_number(row[index[schema.target]], path, lineno, schema.target))
            for name in schema.numeric:
                numeric[name].append(_parse_number(row[index[name]], path, lineno, name))
            for name in schema.categorical:
                value = row[index[name]].strip()
                categorical[name].append(value if value else MISSING_CATEGORY)

    if not timestamps:
        raise DataError(f"{path}: no data rows")
    ts = np.array(timestamps, dtype="datetime64[s]")
    order = np.argsort(ts, kind="stable")
    covariates = [Covariate(n, NUMERIC, np.asarray(numeric[n])[order]) for n in schema.numeric]
    covariates += [Covariate(n, CATEGORICAL, np.asarray(categorical[n], dtype=object)[order]) for n in schema.categorical]
    return TimeSeries(ts[order], np.asarray(target)[order], tuple(covariates))


def _parse_number(text: str, path: Path, lineno: int, column: str) -> float:
    text = text.strip()
    if not text:
        raise DataError(f"{path}:{lineno}: missing value in column {column!r}")
    try:
        value = float(text)
    except ValueError as exc:
        raise DataError(f"{path}:{lineno}: unparseable number {text!r} in column {column!r}") from exc
    if not np.isfinite(value):
        raise DataError(f"{path}:{lineno}: non-finite value in column {column!r}")
    return value


def write_csv(series: TimeSeries, path: str | Path, schema: ColumnSchema | None = None) -> ColumnSchema:
    """Write a series as CSV; the returned schema re-ingests it identically."""
    if schema is None:
        schema = ColumnSchema(
            date="date",
            target="target",
            numeric=tuple(c.name for c in series.covariates if c.kind == NUMERIC),
            categorical=tuple(c.name for c in series.covariates if c.kind == CATEGORICAL),
        )
    by_name = {c.name: c for c in series.covariates}
    columns = [*schema.numeric, *schema.categorical]
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle)
        writer.writerow([schema.date, schema.target, *columns])
        for i in range(len(series)):
            row = [_format_timestamp(series.timestamps[i]), repr(float(series.target[i]))]
            for name in columns:
                cov = by_name[name]
                row.append(repr(float(cov.values[i])) if cov.kind == NUMERIC else str(cov.values[i]))
            writer.writerow(row)
    return schema


def standardize(series: TimeSeries) -> tuple[TimeSeries, StandardizationParams]:
    """Z-score the target (population std-dev); covariates are untouched."""
    target = series.target
    if np.unique(target).size < 2:
        raise DataError("cannot standardize a constant target")
    params = StandardizationParams(mean=float(np.mean(target)), std_dev=float(np.std(target)))
    return replace(series, target=params.apply(target)), params


def add_date_covariates(series: TimeSeries, parts: tuple[str, ...]) -> TimeSeries:
    """Append calendar covariates derived from each row's timestamp.

    Supported parts: day, month, year, weekday (Monday=0).  The new columns
    are numeric and tagged last-value-aggregated, so window aggregation
    takes the value at the last train point instead of summing.
    """
    if not parts:
        raise DataError("at least one date part is required")
    unknown = [p for p in parts if p not in DATE_PARTS]
    if unknown:
        raise DataError(f"unknown date parts {unknown}; expected subset of {list(DATE_PARTS)}")
    existing = {c.name for c in series.covariates}
    ts = series.timestamps
    days = ts.astype("datetime64[D]")
    months = ts.astype("datetime64[M]")
    values = {
        "year": months.astype(np.int64) // 12 + 1970,
        "month": months.astype(np.int64) % 12 + 1,
        "day": (days - months).astype(np.int64) + 1,
        "weekday": (days.astype(np.int64) + 3) % 7,  # epoch day 0 is a Thursday
    }
    new = list(series.covariates)
    for part in DATE_PARTS:
        if part not in parts:
            continue
        if part in existing:
            raise DataError(f"date covariate {part!r} collides with an existing column")
        new.append(Covariate(part, NUMERIC, values[part].astype(np.float64), AGG_LAST))
    return replace(series, covariates=tuple(new))


def plan_splits(
    series: TimeSeries,
    n: int,
    m: int,
    requested_splits: int | None = None,
    stride: int = 1,
) -> SplitPlan:
    """Enumerate sliding (n, m) windows over the series.

    Without ``requested_splits`` every realizable split is emitted: train
    starts at 0, stride, 2*stride, ... while the predict range stays in
    bounds.  With it, the requested count of most-recent splits is emitted,
    anchored so the last split ends at the series end and stepping back by
    ``stride``.
    """
    length = len(series)
    if n < 2 or m < 1:
        raise DataError(f"window sizes out of range (n={n}, m={m})")
    if stride < 1:
        raise DataError(f"stride must be >= 1, got {stride}")
    if n + m > length:
        raise DataError(f"n + m = {n + m} exceeds series length {length}")
    last_start = length - n - m
    max_count = last_start // stride + 1
    if requested_splits is None:
        starts = range(0, last_start + 1, stride)
    else:
        if not (1 <= requested_splits <= max_count):
            raise DataError(f"requested_splits={requested_splits} outside [1, {max_count}]")
        starts = sorted(last_start - i * stride for i in range(requested_splits))
    splits = tuple(WindowSplit(s, n, m) for s in starts)
    return SplitPlan(n=n, m=m, stride=stride, splits=splits)
