"""Window statistics catalog and the four-stage feature-reduction cascade.

Statistics that are undefined for a window (autocorrelation of a constant
sequence, coefficient of variation at mean zero, ...) return NaN.  NaN is
the missing sentinel throughout: it feeds the null filter and never
satisfies a rule conjunct downstream.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Callable

import numpy as np

from .errors import DataError, TrainingError
from .optim import ElasticNetSpec, fit_elastic_net

CATALOG_VERSION = "stats-v1"

_TINY = 1e-12


def _mean_change(x: np.ndarray) -> float:
    return float(np.mean(np.diff(x)))


def _skewness(x: np.ndarray) -> float:
    d = x - np.mean(x)
    m2 = float(np.mean(d**2))
    if m2 <= _TINY:
        return float("nan")
    return float(np.mean(d**3) / m2**1.5)


def _kurtosis(x: np.ndarray) -> float:
    d = x - np.mean(x)
    m2 = float(np.mean(d**2))
    if m2 <= _TINY:
        return float("nan")
    return float(np.mean(d**4) / m2**2 - 3.0)


def _longest_run(mask: np.ndarray) -> float:
    best = run = 0
    for hit in mask:
        run = run + 1 if hit else 0
        best = max(best, run)
    return float(best)


def _number_of_peaks(x: np.ndarray) -> float:
    if x.size < 3:
        return 0.0
    inner = x[1:-1]
    return float(np.count_nonzero((inner > x[:-2]) & (inner > x[2:])))


def _zero_crossings_about_mean(x: np.ndarray) -> float:
    d = x - np.mean(x)
    return float(np.count_nonzero(d[:-1] * d[1:] < 0))


def _linear_trend(x: np.ndarray) -> tuple[float, float, float]:
    n = x.size
    t = np.arange(n, dtype=np.float64)
    t_mean = (n - 1) / 2.0
    x_mean = float(np.mean(x))
    var_t = float(np.mean((t - t_mean) ** 2))
    slope = float(np.mean((t - t_mean) * (x - x_mean)) / var_t)
    intercept = x_mean - slope * t_mean
    ss_tot = float(np.sum((x - x_mean) ** 2))
    if ss_tot <= _TINY:
        return slope, intercept, float("nan")
    residuals = x - (intercept + slope * t)
    return slope, intercept, 1.0 - float(np.sum(residuals**2)) / ss_tot


def _autocorrelation(x: np.ndarray, lag: int) -> float:
    n = x.size
    if lag >= n:
        return float("nan")
    d = x - np.mean(x)
    denom = float(np.mean(d**2))
    if denom <= _TINY:
        return float("nan")
    num = float(d[:-lag] @ d[lag:]) / (n - lag)
    return num / denom


def _partial_sum_ratio(x: np.ndarray) -> float:
    total = float(np.sum(x))
    if abs(total) <= _TINY:
        return float("nan")
    tail = max(1, x.size // 4)
    return float(np.sum(x[-tail:])) / total


def _binned_entropy(x: np.ndarray) -> float:
    counts, _ = np.histogram(x, bins=10)
    p = counts[counts > 0] / x.size
    return float(-np.sum(p * np.log(p)))


def _mean_second_derivative(x: np.ndarray) -> float:
    if x.size < 3:
        return float("nan")
    return float(np.mean((x[2:] - 2 * x[1:-1] + x[:-2]) / 2.0))


def _ratio_beyond_sigma(x: np.ndarray, r: float) -> float:
    std = float(np.std(x))
    return float(np.mean(np.abs(x - np.mean(x)) > r * std))


def _coefficient_of_variation(x: np.ndarray) -> float:
    mean = float(np.mean(x))
    if abs(mean) <= _TINY:
        return float("nan")
    return float(np.std(x)) / mean


@dataclass(frozen=True)
class FeatureCatalog:
    """Ordered, versioned collection of named window statistics."""

    entries: tuple[tuple[str, Callable[[np.ndarray], float]], ...]
    version: str

    def __post_init__(self) -> None:
        names = self.names
        if len(set(names)) != len(names):
            raise DataError("catalog feature names must be unique")

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(name for name, _ in self.entries)

    def __len__(self) -> int:
        return len(self.entries)


def default_catalog() -> FeatureCatalog:
    """The fixed 40-statistic catalog used by the ensemble."""
    entries: tuple[tuple[str, Callable[[np.ndarray], float]], ...] = (
        ("mean", lambda x: float(np.mean(x))),
        ("median", lambda x: float(np.median(x))),
        ("std_dev", lambda x: float(np.std(x))),
        ("variance", lambda x: float(np.var(x))),
        ("min", lambda x: float(np.min(x))),
        ("max", lambda x: float(np.max(x))),
        ("range", lambda x: float(np.max(x) - np.min(x))),
        ("sum", lambda x: float(np.sum(x))),
        ("abs_energy", lambda x: float(np.sum(x**2))),
        ("root_mean_square", lambda x: float(np.sqrt(np.mean(x**2)))),
        ("mean_abs_change", lambda x: float(np.mean(np.abs(np.diff(x))))),
        ("mean_change", _mean_change),
        ("skewness", _skewness),
        ("kurtosis", _kurtosis),
        ("quantile_10", lambda x: float(np.quantile(x, 0.10))),
        ("quantile_25", lambda x: float(np.quantile(x, 0.25))),
        ("quantile_75", lambda x: float(np.quantile(x, 0.75))),
        ("quantile_90", lambda x: float(np.quantile(x, 0.90))),
        ("iqr", lambda x: float(np.quantile(x, 0.75) - np.quantile(x, 0.25))),
        ("count_above_mean", lambda x: float(np.count_nonzero(x > np.mean(x)))),
        ("count_below_mean", lambda x: float(np.count_nonzero(x < np.mean(x)))),
        ("longest_strike_above_mean", lambda x: _longest_run(x > np.mean(x))),
        ("longest_strike_below_mean", lambda x: _longest_run(x < np.mean(x))),
        ("number_of_peaks", _number_of_peaks),
        ("number_of_zero_crossings", _zero_crossings_about_mean),
        ("first_value", lambda x: float(x[0])),
        ("last_value", lambda x: float(x[-1])),
        ("linear_trend_slope", lambda x: _linear_trend(x)[0]),
        ("linear_trend_intercept", lambda x: _linear_trend(x)[1]),
        ("linear_trend_r2", lambda x: _linear_trend(x)[2]),
        ("autocorrelation_lag1", lambda x: _autocorrelation(x, 1)),
        ("autocorrelation_lag2", lambda x: _autocorrelation(x, 2)),
        ("autocorrelation_lag3", lambda x: _autocorrelation(x, 3)),
        ("autocorrelation_lag7", lambda x: _autocorrelation(x, 7)),
        ("partial_sum_ratio", _partial_sum_ratio),
        ("binned_entropy", _binned_entropy),
        ("mean_second_derivative_central", _mean_second_derivative),
        ("ratio_beyond_1_sigma", lambda x: _ratio_beyond_sigma(x, 1.0)),
        ("ratio_beyond_2_sigma", lambda x: _ratio_beyond_sigma(x, 2.0)),
        ("coefficient_of_variation", _coefficient_of_variation),
    )
    return FeatureCatalog(entries=entries, version=CATALOG_VERSION)


def extract_features(window: np.ndarray, catalog: FeatureCatalog) -> np.ndarray:
    """Compute one value per catalog entry, in catalog order."""
    window = np.asarray(window, dtype=np.float64)
    if window.size < 2:
        raise DataError(f"window too short for feature extraction ({window.size} < 2)")
    if not np.all(np.isfinite(window)):
        raise DataError("window contains non-finite values")
    return np.array([fn(window) for _, fn in catalog.entries], dtype=np.float64)


@dataclass(frozen=True)
class FeatureMatrix:
    """Rectangular matrix of feature values; NaN marks a missing value."""

    columns: tuple[str, ...]
    values: np.ndarray

    def __post_init__(self) -> None:
        values = np.asarray(self.values, dtype=np.float64)
        if values.ndim != 2 or values.shape[1] != len(self.columns):
            raise DataError("feature matrix shape does not match column names")
        if len(set(self.columns)) != len(self.columns):
            raise DataError("feature matrix column names must be unique")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    @property
    def n_rows(self) -> int:
        return int(self.values.shape[0])

    def column(self, name: str) -> np.ndarray:
        return self.values[:, self.columns.index(name)]

    def select(self, columns: tuple[str, ...]) -> "FeatureMatrix":
        idx = [self.columns.index(c) for c in columns]
        return FeatureMatrix(tuple(columns), self.values[:, idx])

    def to_csv(self, path: str | Path) -> None:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        with path.open("w", encoding="utf-8") as handle:
            handle.write(",".join(self.columns) + "\n")
            for row in self.values:
                handle.write(",".join(repr(float(v)) for v in row) + "\n")


@dataclass(frozen=True)
class ReductionThresholds:
    null_frac: float = 0.5
    similarity: float = 0.95
    corr: float = 0.95


@dataclass(frozen=True)
class ElasticNetSelection:
    alpha: float = 0.9
    l1_ratio: float = 0.7
    min_coefficient: float = 1e-8


@dataclass(frozen=True)
class ReductionReport:
    """Stage-by-stage account of every input column.

    Each input column lands in exactly one bucket; ``final_columns`` is the
    set the ElasticNet stage kept, in original column order.
    """

    dropped_null: tuple[dict, ...]
    dropped_similarity: tuple[dict, ...]
    dropped_low_variance: tuple[str, ...]
    dropped_correlated: tuple[dict, ...]
    dropped_elasticnet: tuple[dict, ...]
    elasticnet_selected: tuple[dict, ...]
    final_columns: tuple[str, ...]

    def stage_counts(self) -> dict[str, int]:
        return {
            "dropped_null": len(self.dropped_null),
            "dropped_similarity": len(self.dropped_similarity),
            "dropped_low_variance": len(self.dropped_low_variance),
            "dropped_correlated": len(self.dropped_correlated),
            "dropped_elasticnet": len(self.dropped_elasticnet),
            "selected": len(self.final_columns),
        }

    def to_dict(self) -> dict:
        return {
            "dropped_null": list(self.dropped_null),
            "dropped_similarity": list(self.dropped_similarity),
            "dropped_low_variance": list(self.dropped_low_variance),
            "dropped_correlated": list(self.dropped_correlated),
            "dropped_elasticnet": list(self.dropped_elasticnet),
            "elasticnet_selected": list(self.elasticnet_selected),
            "final_columns": list(self.final_columns),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)

    @classmethod
    def from_dict(cls, payload: dict) -> "ReductionReport":
        return cls(
            dropped_null=tuple(payload["dropped_null"]),
            dropped_similarity=tuple(payload["dropped_similarity"]),
            dropped_low_variance=tuple(payload["dropped_low_variance"]),
            dropped_correlated=tuple(payload["dropped_correlated"]),
            dropped_elasticnet=tuple(payload["dropped_elasticnet"]),
            elasticnet_selected=tuple(payload["elasticnet_selected"]),
            final_columns=tuple(payload["final_columns"]),
        )


def _values_agree(a: np.ndarray, b: np.ndarray, rtol: float = 1e-9) -> np.ndarray:
    both_nan = np.isnan(a) & np.isnan(b)
    with np.errstate(invalid="ignore"):
        close = np.abs(a - b) <= rtol * np.maximum(np.abs(a), np.abs(b))
    close &= ~np.isnan(a) & ~np.isnan(b)
    return both_nan | close


def _nan_variance(col: np.ndarray) -> float:
    finite = col[np.isfinite(col)]
    if finite.size < 2:
        return 0.0
    return float(np.var(finite))


def _pearson(a: np.ndarray, b: np.ndarray) -> float:
    mask = np.isfinite(a) & np.isfinite(b)
    if np.count_nonzero(mask) < 2:
        return 0.0
    x, y = a[mask], b[mask]
    sx, sy = float(np.std(x)), float(np.std(y))
    if sx <= _TINY or sy <= _TINY:
        return 0.0
    return float(np.mean((x - np.mean(x)) * (y - np.mean(y))) / (sx * sy))


def reduce_features(
    matrix: FeatureMatrix,
    labels: np.ndarray,
    thresholds: ReductionThresholds = ReductionThresholds(),
    enet: ElasticNetSelection = ElasticNetSelection(),
) -> tuple[FeatureMatrix, ReductionReport]:
    """Run the reduction cascade: null -> similarity/variance -> correlation -> ElasticNet.

    ``labels`` is the numeric encoding of the best-model class per row; the
    final stage standardizes the survivors and keeps the columns the
    ElasticNet fit assigns a non-negligible coefficient.  Missing values are
    mean-imputed inside the selection fit only; the returned matrix keeps
    its NaNs.
    """
    if matrix.n_rows < 2:
        raise TrainingError(f"feature reduction needs >= 2 rows, got {matrix.n_rows}")
    labels = np.asarray(labels, dtype=np.float64)
    if labels.shape != (matrix.n_rows,):
        raise TrainingError("labels length does not match matrix rows")

    values = matrix.values
    n_rows = matrix.n_rows
    dropped_null: list[dict] = []
    survivors: list[int] = []
    for j, name in enumerate(matrix.columns):
        null_frac = float(np.count_nonzero(np.isnan(values[:, j]))) / n_rows
        if null_frac > thresholds.null_frac:
            dropped_null.append({"name": name, "null_fraction": null_frac})
        else:
            survivors.append(j)

    dropped_similarity: list[dict] = []
    kept: list[int] = []
    for j in survivors:
        duplicate_of = None
        reason = None
        for i in kept:
            agree = float(np.count_nonzero(_values_agree(values[:, i], values[:, j]))) / n_rows
            if agree >= thresholds.similarity:
                duplicate_of, reason = matrix.columns[i], "values"
                break
            vi, vj = _nan_variance(values[:, i]), _nan_variance(values[:, j])
            if vi > _TINY and vj > _TINY:
                if abs(vi - vj) <= 5e-2 * max(vi, vj) and _pearson(values[:, i], values[:, j]) >= 0.999:
                    duplicate_of, reason = matrix.columns[i], "variance"
                    break
        if duplicate_of is None:
            kept.append(j)
        else:
            dropped_similarity.append({"name": matrix.columns[j], "duplicate_of": duplicate_of, "rule": reason})

    dropped_low_variance: list[str] = []
    nonconstant: list[int] = []
    for j in kept:
        if _nan_variance(values[:, j]) <= _TINY:
            dropped_low_variance.append(matrix.columns[j])
        else:
            nonconstant.append(j)

    dropped_correlated: list[dict] = []
    uncorrelated: list[int] = []
    for j in nonconstant:
        partner = None
        for i in uncorrelated:
            r = _pearson(values[:, i], values[:, j])
            if abs(r) >= thresholds.corr:
                partner = (matrix.columns[i], abs(r))
                break
        if partner is None:
            uncorrelated.append(j)
        else:
            dropped_correlated.append({"name": matrix.columns[j], "partner": partner[0], "abs_r": partner[1]})

    dropped_elasticnet: list[dict] = []
    selected: list[dict] = []
    final: list[int] = []
    if uncorrelated:
        design = values[:, uncorrelated].copy()
        for k in range(design.shape[1]):
            col = design[:, k]
            nan = np.isnan(col)
            if nan.any():
                col[nan] = float(np.mean(col[~nan]))
        means = design.mean(axis=0)
        stds = design.std(axis=0)
        design = (design - means) / stds
        spec = ElasticNetSpec(alpha=enet.alpha, l1_ratio=enet.l1_ratio)
        fit = fit_elastic_net(design, labels, spec)
        for k, j in enumerate(uncorrelated):
            coef = abs(float(fit.weights[k]))
            entry = {"name": matrix.columns[j], "coefficient": coef}
            if coef > enet.min_coefficient:
                selected.append(entry)
                final.append(j)
            else:
                dropped_elasticnet.append(entry)

    report = ReductionReport(
        dropped_null=tuple(dropped_null),
        dropped_similarity=tuple(dropped_similarity),
        dropped_low_variance=tuple(dropped_low_variance),
        dropped_correlated=tuple(dropped_correlated),
        dropped_elasticnet=tuple(dropped_elasticnet),
        elasticnet_selected=tuple(selected),
        final_columns=tuple(matrix.columns[j] for j in final),
    )
    if not final:
        raise TrainingError(f"feature reduction eliminated every column: {report.stage_counts()}")
    return FeatureMatrix(report.final_columns, values[:, final]), report
