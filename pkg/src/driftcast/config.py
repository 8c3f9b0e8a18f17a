"""Run configuration: one JSON file validated as a whole, flags override.

Unknown keys anywhere in the file are rejected so typos fail loudly before
any work starts.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

from .ensemble import DriftSettings, TrainSettings
from .errors import ConfigError, DataError
from .features import ElasticNetSelection, ReductionThresholds
from .metrics import METRICS
from .predictors import PredictorSpec, default_models_db
from .rulefit import RuleFitConfig
from .series import DATE_PARTS, ColumnSchema


def _require_keys(section: dict, allowed: set[str], where: str) -> None:
    unknown = sorted(set(section) - allowed)
    if unknown:
        raise ConfigError(f"unknown keys {unknown} in {where}; allowed: {sorted(allowed)}")


@dataclass(frozen=True)
class DataSettings:
    path: str
    date_column: str = "date"
    target_column: str = "target"
    numeric_covariates: tuple[str, ...] = ()
    categorical_covariates: tuple[str, ...] = ()
    date_parts: tuple[str, ...] = ()

    def __post_init__(self) -> None:
        bad = [p for p in self.date_parts if p not in DATE_PARTS]
        if bad:
            raise ConfigError(f"unknown date_parts {bad}; allowed: {list(DATE_PARTS)}")

    def schema(self) -> ColumnSchema:
        try:
            return ColumnSchema(
                date=self.date_column,
                target=self.target_column,
                numeric=self.numeric_covariates,
                categorical=self.categorical_covariates,
            )
        except DataError as exc:
            raise ConfigError(str(exc)) from exc

    def to_dict(self) -> dict:
        return {
            "path": self.path,
            "date_column": self.date_column,
            "target_column": self.target_column,
            "numeric_covariates": list(self.numeric_covariates),
            "categorical_covariates": list(self.categorical_covariates),
            "date_parts": list(self.date_parts),
        }


@dataclass(frozen=True)
class BacktestSettings:
    train_fraction: float = 0.4
    step: int = 7

    def __post_init__(self) -> None:
        if not (0.0 < self.train_fraction < 1.0):
            raise ConfigError("backtest.train_fraction must be in (0, 1)")
        if self.step < 1:
            raise ConfigError("backtest.step must be >= 1")


@dataclass(frozen=True)
class RunConfig:
    """Validated configuration for every CLI command."""

    data: DataSettings
    season_length: int = 7
    predictors: tuple[PredictorSpec, ...] = ()
    train: TrainSettings = TrainSettings()
    drift: DriftSettings = DriftSettings()
    backtest: BacktestSettings = BacktestSettings()
    seed: int = 0
    output_dir: str = "out"
    workers: int = 1

    def pool(self) -> tuple[PredictorSpec, ...]:
        return self.predictors or default_models_db(self.season_length)


_TOP_KEYS = {"data", "model", "features", "rules", "drift", "backtest", "seed", "output_dir", "workers"}
_DATA_KEYS = {"path", "date_column", "target_column", "numeric_covariates", "categorical_covariates", "date_parts"}
_MODEL_KEYS = {"n", "m", "stride", "requested_splits", "season_length", "metric", "top_k", "table_cap", "predictors"}
_FEATURE_KEYS = {"null_frac", "similarity", "corr", "enet_alpha", "enet_l1_ratio"}
_RULE_KEYS = {"n_trees", "max_depth", "learning_rate", "subsample", "l1_c", "include_linear_terms"}
_DRIFT_KEYS = {"detector", "window_size", "sample_size", "alpha", "delta", "min_interval_steps"}
_BACKTEST_KEYS = {"train_fraction", "step"}


def config_from_dict(payload: dict[str, Any]) -> RunConfig:
    if not isinstance(payload, dict):
        raise ConfigError("config root must be a JSON object")
    _require_keys(payload, _TOP_KEYS, "config")
    if "data" not in payload:
        raise ConfigError("config requires a 'data' section")

    data_raw = payload["data"]
    _require_keys(data_raw, _DATA_KEYS, "config.data")
    if "path" not in data_raw:
        raise ConfigError("config.data requires 'path'")
    data = DataSettings(
        path=str(data_raw["path"]),
        date_column=str(data_raw.get("date_column", "date")),
        target_column=str(data_raw.get("target_column", "target")),
        numeric_covariates=tuple(data_raw.get("numeric_covariates", [])),
        categorical_covariates=tuple(data_raw.get("categorical_covariates", [])),
        date_parts=tuple(data_raw.get("date_parts", [])),
    )
    data.schema()

    model_raw = dict(payload.get("model", {}))
    _require_keys(model_raw, _MODEL_KEYS, "config.model")
    season_length = int(model_raw.get("season_length", 7))
    if season_length < 1:
        raise ConfigError("model.season_length must be >= 1")
    predictors_raw = model_raw.get("predictors", "default")
    try:
        if predictors_raw == "default":
            predictors: tuple[PredictorSpec, ...] = ()
        else:
            predictors = tuple(PredictorSpec.from_dict(p) for p in predictors_raw)
            if len({p.id for p in predictors}) != len(predictors):
                raise ConfigError("model.predictors ids must be unique")
    except (DataError, KeyError, TypeError) as exc:
        raise ConfigError(f"invalid model.predictors: {exc}") from exc

    features_raw = dict(payload.get("features", {}))
    _require_keys(features_raw, _FEATURE_KEYS, "config.features")
    rules_raw = dict(payload.get("rules", {}))
    _require_keys(rules_raw, _RULE_KEYS, "config.rules")
    drift_raw = dict(payload.get("drift", {}))
    _require_keys(drift_raw, _DRIFT_KEYS, "config.drift")
    backtest_raw = dict(payload.get("backtest", {}))
    _require_keys(backtest_raw, _BACKTEST_KEYS, "config.backtest")

    seed = int(payload.get("seed", 0))
    metric = str(model_raw.get("metric", "MAE")).upper()
    if metric not in METRICS:
        raise ConfigError(f"model.metric must be one of {list(METRICS)}")

    def positive_int(section: dict, key: str, default: int, where: str) -> int:
        value = int(section.get(key, default))
        if value < 1:
            raise ConfigError(f"{where}.{key} must be >= 1")
        return value

    def optional_positive(section: dict, key: str, where: str) -> int | None:
        value = section.get(key)
        if value is None:
            return None
        value = int(value)
        if value < 1:
            raise ConfigError(f"{where}.{key} must be >= 1 when set")
        return value

    try:
        thresholds = ReductionThresholds(
            null_frac=float(features_raw.get("null_frac", 0.5)),
            similarity=float(features_raw.get("similarity", 0.95)),
            corr=float(features_raw.get("corr", 0.95)),
        )
        enet = ElasticNetSelection(
            alpha=float(features_raw.get("enet_alpha", 0.9)),
            l1_ratio=float(features_raw.get("enet_l1_ratio", 0.7)),
        )
        if not (0.0 <= enet.l1_ratio <= 1.0):
            raise ConfigError("features.enet_l1_ratio must be in [0, 1]")
        if enet.alpha < 0:
            raise ConfigError("features.enet_alpha must be >= 0")
        rule_config = RuleFitConfig(
            n_trees=positive_int(rules_raw, "n_trees", 100, "rules"),
            max_depth=positive_int(rules_raw, "max_depth", 3, "rules"),
            learning_rate=float(rules_raw.get("learning_rate", 0.1)),
            subsample=float(rules_raw.get("subsample", 0.75)),
            l1_c=float(rules_raw.get("l1_c", 50.0)),
            include_linear_terms=bool(rules_raw.get("include_linear_terms", False)),
            seed=seed,
        )
        train = TrainSettings(
            n=positive_int(model_raw, "n", 30, "model"),
            m=positive_int(model_raw, "m", 7, "model"),
            stride=positive_int(model_raw, "stride", 1, "model"),
            requested_splits=optional_positive(model_raw, "requested_splits", "model"),
            metric=metric,
            top_k=optional_positive(model_raw, "top_k", "model"),
            table_cap=optional_positive(model_raw, "table_cap", "model"),
            thresholds=thresholds,
            enet=enet,
            rule_config=rule_config,
        )
        drift = DriftSettings(
            detector=str(drift_raw.get("detector", "kswin")),
            window_size=int(drift_raw.get("window_size", 100)),
            sample_size=int(drift_raw.get("sample_size", 30)),
            alpha=float(drift_raw.get("alpha", 0.005)),
            delta=float(drift_raw.get("delta", 0.002)),
            min_interval_steps=int(drift_raw.get("min_interval_steps", 14)),
            seed=seed,
        )
        backtest = BacktestSettings(
            train_fraction=float(backtest_raw.get("train_fraction", 0.4)),
            step=int(backtest_raw.get("step", 7)),
        )
    except DataError as exc:
        raise ConfigError(str(exc)) from exc

    if train.n < 2:
        raise ConfigError("model.n must be >= 2")
    workers = int(payload.get("workers", 1))
    if workers < 1:
        raise ConfigError("workers must be >= 1")

    return RunConfig(
        data=data,
        season_length=season_length,
        predictors=predictors,
        train=train,
        drift=drift,
        backtest=backtest,
        seed=seed,
        output_dir=str(payload.get("output_dir", "out")),
        workers=workers,
    )


def load_config(path: str | Path, overrides: dict[str, Any] | None = None) -> RunConfig:
    """Load and validate a JSON config file; ``overrides`` win over the file."""
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"config file not found: {path}")
    try:
        payload = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON: {exc}") from exc
    for key, value in (overrides or {}).items():
        if value is None:
            continue
        if key == "data_path":
            payload.setdefault("data", {})["path"] = value
        else:
            payload[key] = value
    return config_from_dict(payload)
