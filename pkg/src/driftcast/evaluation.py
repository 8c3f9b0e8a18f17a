"""Blocked cross-validation backtester and MAPE scoring.

Folds tile the region after the initial training fraction in forecast-
horizon steps; every contender trains only on data strictly before each
fold's forecast range.  Single predictors refit per fold; the ensemble
contender runs its full online lifecycle (drift detection, guarded
retrains) chronologically across folds.
"""

from __future__ import annotations

import json
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .ensemble import DriftSettings, EnsembleModel, OnlineForecaster, TrainSettings, train_ensemble
from .errors import DataError, TrainingError
from .metrics import MapeUndefinedError, mape
from .predictors import PredictorSpec, fit_predict
from .series import TimeSeries

logger = logging.getLogger(__name__)

ENSEMBLE_ID = "ensemble"


@dataclass(frozen=True)
class Fold:
    """Half-open forecast range [start, stop); training data ends at start."""

    index: int
    start: int
    stop: int


@dataclass(frozen=True)
class BacktestPlan:
    train_fraction: float
    step: int
    folds: tuple[Fold, ...]

    @classmethod
    def for_length(cls, length: int, train_fraction: float = 0.4, step: int = 7) -> "BacktestPlan":
        if not (0.0 < train_fraction < 1.0):
            raise DataError("train_fraction must be in (0, 1)")
        if step < 1:
            raise DataError("step must be >= 1")
        train_size = math.floor(train_fraction * length)
        folds = []
        start = train_size
        while start + step <= length:
            folds.append(Fold(index=len(folds), start=start, stop=start + step))
            start += step
        if len(folds) < 2:
            raise DataError(
                f"series too short for 2 folds (length {length}, train {train_size}, step {step})"
            )
        return cls(train_fraction=train_fraction, step=step, folds=tuple(folds))


@dataclass
class ModelScore:
    fold_mapes: list[float | None] = field(default_factory=list)
    invalid_folds: list[int] = field(default_factory=list)

    @property
    def mean_mape(self) -> float:
        valid = [v for v in self.fold_mapes if v is not None]
        if not valid:
            return float("nan")
        return float(np.mean(valid))


@dataclass
class ScoreReport:
    """Per-model fold scores plus the ensemble's weights and retrains."""

    plan: BacktestPlan
    models: dict[str, ModelScore]
    weights: list[dict[str, float]]
    retrain_timestamps: list[str]
    drift_events: list[dict]

    def to_dict(self) -> dict:
        return {
            "train_fraction": self.plan.train_fraction,
            "step": self.plan.step,
            "folds": [{"index": f.index, "start": f.start, "stop": f.stop} for f in self.plan.folds],
            "models": {
                name: {
                    "fold_mapes": score.fold_mapes,
                    "invalid_folds": score.invalid_folds,
                    "mean_mape": None if math.isnan(score.mean_mape) else score.mean_mape,
                }
                for name, score in self.models.items()
            },
            "weights": self.weights,
            "retrain_timestamps": self.retrain_timestamps,
            "drift_events": self.drift_events,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)

    def write(self, directory: str | Path) -> None:
        directory = Path(directory)
        directory.mkdir(parents=True, exist_ok=True)
        (directory / "report.json").write_text(self.to_json() + "\n", encoding="utf-8")
        with (directory / "scores.csv").open("w", encoding="utf-8") as handle:
            handle.write("fold,forecast_start,forecast_stop,model,mape,valid\n")
            for fold in self.plan.folds:
                for name, score in sorted(self.models.items()):
                    value = score.fold_mapes[fold.index]
                    valid = value is not None
                    handle.write(
                        f"{fold.index},{fold.start},{fold.stop},{name},"
                        f"{'' if value is None else repr(value)},{int(valid)}\n"
                    )
        if self.weights:
            ids = sorted(self.weights[0])
            with (directory / "weights.csv").open("w", encoding="utf-8") as handle:
                handle.write("fold," + ",".join(f"weight_{i}" for i in ids) + "\n")
                for fold, row in zip(self.plan.folds, self.weights):
                    handle.write(f"{fold.index}," + ",".join(repr(row[i]) for i in ids) + "\n")


def run_backtest(
    series: TimeSeries,
    plan: BacktestPlan,
    singles: tuple[PredictorSpec, ...],
    ensemble_settings: TrainSettings | None = None,
    ensemble_pool: tuple[PredictorSpec, ...] = (),
    drift: DriftSettings = DriftSettings(),
    workers: int = 1,
) -> ScoreReport:
    """Score single predictors and (optionally) the full ensemble lifecycle.

    Folds with an actual value inside the MAPE epsilon guard are marked
    invalid for every contender and excluded from means.
    """
    length = len(series)
    if not plan.folds or plan.folds[-1].stop > length:
        raise DataError("backtest plan does not fit the series")
    models: dict[str, ModelScore] = {spec.id: ModelScore() for spec in singles}
    weights: list[dict[str, float]] = []
    retrain_timestamps: list[str] = []
    drift_events: list[dict] = []

    runner: OnlineForecaster | None = None
    if ensemble_settings is not None:
        if not ensemble_pool:
            raise DataError("ensemble backtest requires a predictor pool")
        models[ENSEMBLE_ID] = ModelScore()
        initial = series.take(slice(0, plan.folds[0].start))
        model, summary = train_ensemble(initial, ensemble_pool, ensemble_settings, workers=workers)
        logger.info("backtest initial training: %s", summary.label_histogram)
        runner = OnlineForecaster(model, initial, drift=drift, workers=workers)

    for fold in plan.folds:
        actual = series.target[fold.start : fold.stop]
        horizon = fold.stop - fold.start
        history_target = series.target[: fold.start]

        for spec in singles:
            try:
                forecast = fit_predict(spec, history_target, horizon)
                value = mape(actual, forecast.values)
            except MapeUndefinedError as exc:
                models[spec.id].fold_mapes.append(None)
                models[spec.id].invalid_folds.append(fold.index)
                logger.info("fold %d invalid for %s: %s", fold.index, spec.id, exc)
                continue
            models[spec.id].fold_mapes.append(value)

        if runner is not None:
            combined = runner.forecast(horizon)
            weights.append({pid: combined.weight(pid) for pid in combined.ids})
            try:
                value = mape(actual, combined.values)
                models[ENSEMBLE_ID].fold_mapes.append(value)
            except MapeUndefinedError as exc:
                models[ENSEMBLE_ID].fold_mapes.append(None)
                models[ENSEMBLE_ID].invalid_folds.append(fold.index)
                logger.info("fold %d invalid for ensemble: %s", fold.index, exc)
            events = runner.observe(series.take(slice(fold.start, fold.stop)))
            for event in events:
                drift_events.append(event.to_dict())
                if event.retrained:
                    retrain_timestamps.append(str(event.timestamp))

    for name, score in models.items():
        if all(v is None for v in score.fold_mapes):
            raise TrainingError(f"no valid folds for contender {name!r}")
    return ScoreReport(
        plan=plan,
        models=models,
        weights=weights,
        retrain_timestamps=retrain_timestamps,
        drift_events=drift_events,
    )
