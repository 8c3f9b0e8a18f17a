"""Native base predictors behind a uniform fit-and-forecast contract.

Six reference predictor kinds with deliberately different inductive
biases: seasonal pattern copy, straight-line drift, exponential level
smoothing, additive Holt-Winters, plain autoregression, and seasonal
autoregression.  Every predictor is a pure function of (spec, train
window, horizon); the ensemble swaps them freely behind
:func:`fit_predict`.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any

import numpy as np

from .errors import DataError, PredictorError

KINDS = ("seasonal_naive", "drift", "ses", "holt_winters", "ar_ols", "seasonal_ar")


@dataclass(frozen=True)
class PredictorSpec:
    """Identifier, kind, and validated hyperparameters of one base predictor."""

    id: str
    kind: str
    params: dict[str, Any] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if not self.id:
            raise DataError("predictor id must be non-empty")
        if self.kind not in KINDS:
            raise DataError(f"unknown predictor kind {self.kind!r}")
        p = dict(self.params)
        if self.kind in ("seasonal_naive", "holt_winters", "seasonal_ar"):
            season = int(p.get("season_length", 0))
            if season < 1:
                raise DataError(f"{self.id}: season_length must be >= 1")
            p["season_length"] = season
        if self.kind == "ses":
            alpha = float(p.get("smoothing", 0.3))
            if not (0.0 < alpha <= 1.0):
                raise DataError(f"{self.id}: smoothing must be in (0, 1]")
            p["smoothing"] = alpha
        if self.kind == "holt_winters":
            for name, default in (("level", 0.2), ("trend", 0.1), ("seasonal", 0.1)):
                value = float(p.get(name, default))
                if not (0.0 < value <= 1.0):
                    raise DataError(f"{self.id}: {name} smoothing must be in (0, 1]")
                p[name] = value
        if self.kind in ("ar_ols", "seasonal_ar"):
            order = int(p.get("order", 0))
            if order < 1:
                raise DataError(f"{self.id}: order must be >= 1")
            p["order"] = order
        object.__setattr__(self, "params", p)

    def minimum_history(self) -> int:
        if self.kind in ("seasonal_naive", "holt_winters"):
            return self.params["season_length"] + 1
        if self.kind == "ar_ols":
            return self.params["order"] + 1
        if self.kind == "seasonal_ar":
            return max(self.params["order"], self.params["season_length"]) + 1
        return 2

    def to_dict(self) -> dict[str, Any]:
        return {"id": self.id, "kind": self.kind, "params": dict(self.params)}

    @classmethod
    def from_dict(cls, payload: dict[str, Any]) -> "PredictorSpec":
        return cls(id=payload["id"], kind=payload["kind"], params=dict(payload.get("params", {})))


@dataclass(frozen=True)
class Forecast:
    """Finite forecast of the requested horizon; ``fallback`` names the
    substitute recursion when a degenerate fit forced one."""

    values: np.ndarray
    predictor_id: str
    fallback: str | None = None

    def __post_init__(self) -> None:
        values = np.asarray(self.values, dtype=np.float64)
        if values.ndim != 1 or values.size == 0:
            raise PredictorError(f"{self.predictor_id}: forecast must be a non-empty vector")
        if not np.all(np.isfinite(values)):
            raise PredictorError(f"{self.predictor_id}: non-finite forecast value")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)


def _forecast_drift(train: np.ndarray, horizon: int) -> np.ndarray:
    n = train.size
    slope = (train[-1] - train[0]) / (n - 1)
    return train[-1] + slope * np.arange(1, horizon + 1)


def _forecast_seasonal_naive(train: np.ndarray, horizon: int, season: int) -> np.ndarray:
    n = train.size
    steps = np.arange(1, horizon + 1)
    return train[n - season + (steps - 1) % season]


def _forecast_ses(train: np.ndarray, horizon: int, alpha: float) -> np.ndarray:
    level = train[0]
    for value in train[1:]:
        level = alpha * value + (1 - alpha) * level
    return np.full(horizon, level)


def _forecast_holt_winters(train: np.ndarray, horizon: int, season: int, a: float, b: float, g: float) -> np.ndarray:
    n = train.size
    level = float(np.mean(train[:season]))
    trend = float(np.mean(np.diff(train[: min(2 * season, n)])))
    seasonal = train[:season] - level
    seasonal = list(seasonal)
    for t in range(season, n):
        prev_level = level
        idx = t % season
        level = a * (train[t] - seasonal[idx]) + (1 - a) * (level + trend)
        trend = b * (level - prev_level) + (1 - b) * trend
        seasonal[idx] = g * (train[t] - level) + (1 - g) * seasonal[idx]
    steps = np.arange(1, horizon + 1)
    seasonal_part = np.array([seasonal[(n + h - 1) % season] for h in steps])
    return level + steps * trend + seasonal_part


def _forecast_ar(train: np.ndarray, horizon: int, lags: list[int], predictor_id: str) -> tuple[np.ndarray, str | None]:
    max_lag = max(lags)
    n = train.size
    rows = n - max_lag
    design = np.ones((rows, len(lags) + 1))
    for k, lag in enumerate(lags):
        design[:, k] = train[max_lag - lag : n - lag]
    response = train[max_lag:]
    coef, _, rank, _ = np.linalg.lstsq(design, response, rcond=None)
    if rank < design.shape[1]:
        return _forecast_drift(train, horizon), "drift"
    history = list(train)
    out = np.empty(horizon)
    for h in range(horizon):
        value = coef[-1] + sum(coef[k] * history[-lag] for k, lag in enumerate(lags))
        history.append(value)
        out[h] = value
    if not np.all(np.isfinite(out)):
        return _forecast_drift(train, horizon), "drift"
    return out, None


def fit_predict(spec: PredictorSpec, train: np.ndarray, horizon: int) -> Forecast:
    """Fit one predictor on a train window and forecast ``horizon`` steps."""
    train = np.asarray(train, dtype=np.float64)
    if horizon < 1:
        raise PredictorError(f"{spec.id}: horizon must be >= 1")
    if not np.all(np.isfinite(train)):
        raise PredictorError(f"{spec.id}: train window contains non-finite values")
    if train.size < spec.minimum_history():
        raise PredictorError(
            f"{spec.id}: needs at least {spec.minimum_history()} points, got {train.size}"
        )

    fallback: str | None = None
    if spec.kind == "seasonal_naive":
        values = _forecast_seasonal_naive(train, horizon, spec.params["season_length"])
    elif spec.kind == "drift":
        values = _forecast_drift(train, horizon)
    elif spec.kind == "ses":
        values = _forecast_ses(train, horizon, spec.params["smoothing"])
    elif spec.kind == "holt_winters":
        p = spec.params
        values = _forecast_holt_winters(
            train, horizon, p["season_length"], p["level"], p["trend"], p["seasonal"]
        )
    elif spec.kind == "ar_ols":
        lags = list(range(1, spec.params["order"] + 1))
        values, fallback = _forecast_ar(train, horizon, lags, spec.id)
    elif spec.kind == "seasonal_ar":
        lags = sorted(set(range(1, spec.params["order"] + 1)) | {spec.params["season_length"]})
        values, fallback = _forecast_ar(train, horizon, lags, spec.id)
    else:  # pragma: no cover - guarded by PredictorSpec
        raise PredictorError(f"unknown kind {spec.kind!r}")
    return Forecast(values=values, predictor_id=spec.id, fallback=fallback)


def default_models_db(season_length: int) -> tuple[PredictorSpec, ...]:
    """The six-predictor reference pool."""
    if season_length < 1:
        raise DataError("season_length must be >= 1")
    return (
        PredictorSpec("seasonal_naive", "seasonal_naive", {"season_length": season_length}),
        PredictorSpec("drift", "drift"),
        PredictorSpec("ses", "ses", {"smoothing": 0.3}),
        PredictorSpec("holt_winters", "holt_winters", {"season_length": season_length}),
        PredictorSpec("ar_ols", "ar_ols", {"order": 7}),
        PredictorSpec("seasonal_ar", "seasonal_ar", {"order": 3, "season_length": season_length}),
    )
