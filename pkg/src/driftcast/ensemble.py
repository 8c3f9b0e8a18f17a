"""Ensemble lifecycle: training-table construction, rule-model training,
probability-weighted forecast combination, and drift-triggered retraining.

The pipeline labels each sliding window with the predictor that forecasts
its held-out points best, trains the rule classifier on (window
statistics, aggregated covariates) -> best predictor, and at prediction
time blends every pool predictor's forecast by the classifier's
probability vector.  An online wrapper feeds new points to the drift
detector and rebuilds the whole model when it fires and the retrain guard
allows.

Scale handling: the target is standardized internally (parameters stored
with the model); predictors and window statistics operate on the
standardized scale while labeling metrics, forecasts, and all external
interfaces use the original scale.
"""

from __future__ import annotations

import json
import logging
from collections import Counter
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .drift import AdwinDetector, DriftEvent, KswinDetector, RetrainGuard
from .errors import DataError, PredictorError, TrainingError
from .features import (
    ElasticNetSelection,
    FeatureCatalog,
    FeatureMatrix,
    ReductionReport,
    ReductionThresholds,
    default_catalog,
    extract_features,
    reduce_features,
)
from .metrics import MapeUndefinedError, score
from .predictors import Forecast, PredictorSpec, fit_predict
from .rulefit import ProbabilityVector, RuleFitConfig, RuleModel, fit_rule_model, predict_proba
from .series import (
    AGG_LAST,
    AGG_SUM,
    CATEGORICAL,
    NUMERIC,
    Covariate,
    SplitPlan,
    StandardizationParams,
    TimeSeries,
    plan_splits,
    standardize,
)

logger = logging.getLogger(__name__)

MODEL_FILE = "model.json"
RULES_FILE = "rules.json"
REDUCTION_FILE = "reduction_report.json"
STANDARDIZATION_FILE = "standardization.json"


def aggregate_covariates(covariates: tuple[Covariate, ...]) -> dict[str, float | str]:
    """Collapse window covariate slices to one value per column.

    Numeric columns sum over the window; last-value-tagged columns (date
    covariates) take the final train point; categorical columns take the
    most frequent category, ties broken by the lexicographically smaller
    one.
    """
    out: dict[str, float | str] = {}
    for cov in covariates:
        if len(cov.values) == 0:
            raise DataError("cannot aggregate an empty window")
        if cov.kind == NUMERIC:
            if cov.aggregate == AGG_LAST:
                out[cov.name] = float(cov.values[-1])
            else:
                out[cov.name] = float(np.sum(cov.values))
        else:
            counts = Counter(cov.values)
            out[cov.name] = min(counts, key=lambda cat: (-counts[cat], cat))
    return out


@dataclass(frozen=True)
class CovariateEncoder:
    """Turns aggregated covariate values into the table's numeric columns.

    Categorical columns one-hot over the categories observed in the
    training rows; an unseen category at predict time encodes to all
    zeros (logged).
    """

    numeric_names: tuple[str, ...]
    categorical: tuple[tuple[str, tuple[str, ...]], ...]

    @property
    def columns(self) -> tuple[str, ...]:
        cols = list(self.numeric_names)
        for name, categories in self.categorical:
            cols.extend(f"{name}={cat}" for cat in categories)
        return tuple(cols)

    def encode(self, aggregated: dict[str, float | str]) -> np.ndarray:
        values: list[float] = []
        for name in self.numeric_names:
            if name not in aggregated:
                raise DataError(f"missing covariate column {name!r}")
            values.append(float(aggregated[name]))
        for name, categories in self.categorical:
            if name not in aggregated:
                raise DataError(f"missing covariate column {name!r}")
            value = str(aggregated[name])
            if value not in categories:
                logger.warning("unseen category %r for covariate %r; encoding as zeros", value, name)
            values.extend(1.0 if value == cat else 0.0 for cat in categories)
        return np.asarray(values, dtype=np.float64)

    @classmethod
    def fit(cls, series: TimeSeries, rows: list[dict[str, float | str]]) -> "CovariateEncoder":
        numeric = tuple(c.name for c in series.covariates if c.kind == NUMERIC)
        categorical = []
        for cov in series.covariates:
            if cov.kind == CATEGORICAL:
                observed = sorted({str(row[cov.name]) for row in rows}) if rows else []
                categorical.append((cov.name, tuple(observed)))
        return cls(numeric_names=numeric, categorical=tuple(categorical))

    def to_dict(self) -> dict:
        return {
            "numeric": list(self.numeric_names),
            "categorical": [{"name": n, "categories": list(c)} for n, c in self.categorical],
        }

    @classmethod
    def from_dict(cls, payload: dict) -> "CovariateEncoder":
        return cls(
            numeric_names=tuple(payload["numeric"]),
            categorical=tuple((e["name"], tuple(e["categories"])) for e in payload["categorical"]),
        )


@dataclass(frozen=True)
class TrainingTable:
    """Rows of (selected statistics, encoded covariates) -> best predictor.

    ``scores`` keeps every predictor's window error (NaN where the
    predictor failed) so the discard rule can relabel exactly.
    """

    columns: tuple[str, ...]
    design: np.ndarray
    labels: tuple[str, ...]
    pool_ids: tuple[str, ...]
    scores: np.ndarray
    metric: str

    def __post_init__(self) -> None:
        design = np.asarray(self.design, dtype=np.float64)
        scores = np.asarray(self.scores, dtype=np.float64)
        if design.shape != (len(self.labels), len(self.columns)):
            raise DataError("training table design shape mismatch")
        if scores.shape != (len(self.labels), len(self.pool_ids)):
            raise DataError("training table score shape mismatch")
        unknown = sorted(set(self.labels) - set(self.pool_ids))
        if unknown:
            raise DataError(f"labels {unknown} not in the predictor pool")
        object.__setattr__(self, "design", design)
        object.__setattr__(self, "scores", scores)

    @property
    def n_rows(self) -> int:
        return len(self.labels)

    def label_histogram(self) -> dict[str, int]:
        counts = Counter(self.labels)
        return {pid: counts.get(pid, 0) for pid in self.pool_ids}


def score_predictors(
    train: np.ndarray,
    actual: np.ndarray,
    pool: tuple[PredictorSpec, ...],
    metric: str,
    params: StandardizationParams | None = None,
) -> np.ndarray:
    """Each pool predictor's error on one window; NaN where it fails.

    ``train`` is on the predictors' (standardized) scale; ``actual`` is on
    the original scale, so forecasts are inverted through ``params`` before
    scoring when given.
    """
    out = np.full(len(pool), np.nan)
    horizon = len(actual)
    for i, spec in enumerate(pool):
        try:
            forecast = fit_predict(spec, train, horizon)
            values = params.invert(forecast.values) if params is not None else forecast.values
            out[i] = score(metric, actual, values)
        except (PredictorError, MapeUndefinedError) as exc:
            logger.debug("predictor %s failed on window: %s", spec.id, exc)
    return out


def label_best_model(
    train: np.ndarray,
    actual: np.ndarray,
    pool: tuple[PredictorSpec, ...],
    metric: str,
    params: StandardizationParams | None = None,
) -> str:
    """Id of the argmin-error predictor; ties go to the earlier pool entry."""
    if not pool:
        raise DataError("predictor pool is empty")
    scores = score_predictors(train, actual, pool, metric, params)
    if np.all(np.isnan(scores)):
        raise TrainingError("every predictor failed on this window")
    return pool[int(np.nanargmin(scores))].id


@dataclass(frozen=True)
class BuildResult:
    table: TrainingTable
    report: ReductionReport
    encoder: CovariateEncoder
    skipped_windows: tuple[int, ...]


def build_training_table(
    series: TimeSeries,
    params: StandardizationParams,
    plan: SplitPlan,
    pool: tuple[PredictorSpec, ...],
    catalog: FeatureCatalog,
    metric: str,
    thresholds: ReductionThresholds = ReductionThresholds(),
    enet: ElasticNetSelection = ElasticNetSelection(),
    table_cap: int | None = None,
    workers: int = 1,
) -> BuildResult:
    """Assemble the table: per split extract statistics, score every pool
    predictor on the held-out points, and aggregate covariates; then run
    the feature-reduction cascade and cap to the most recent rows."""
    if not pool:
        raise DataError("predictor pool is empty")
    z = params.apply(series.target)

    def process(split):
        window = z[split.train_start : split.train_start + plan.n]
        actual = series.target[split.train_start + plan.n : split.stop]
        features = extract_features(window, catalog)
        scores = score_predictors(window, actual, pool, metric, params)
        covs = tuple(c.take(slice(split.train_start, split.train_start + plan.n)) for c in series.covariates)
        return features, scores, aggregate_covariates(covs)

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as executor:
            results = list(executor.map(process, plan.splits))
    else:
        results = [process(split) for split in plan.splits]

    feature_rows: list[np.ndarray] = []
    score_rows: list[np.ndarray] = []
    cov_rows: list[dict[str, float | str]] = []
    skipped: list[int] = []
    for index, (features, scores, aggregated) in enumerate(results):
        if np.all(np.isnan(scores)):
            skipped.append(index)
            logger.info("window %d skipped: every predictor failed", index)
            continue
        feature_rows.append(features)
        score_rows.append(scores)
        cov_rows.append(aggregated)
    if len(feature_rows) < 2:
        raise TrainingError(f"only {len(feature_rows)} usable windows; need at least 2")

    scores = np.vstack(score_rows)
    label_idx = np.array([int(np.nanargmin(row)) for row in scores])
    if np.unique(label_idx).size < 2:
        histogram = Counter(pool[i].id for i in label_idx)
        raise TrainingError(f"fewer than 2 distinct best-model labels: {dict(histogram)}")
    matrix = FeatureMatrix(catalog.names, np.vstack(feature_rows))
    reduced, report = reduce_features(matrix, label_idx.astype(np.float64), thresholds, enet)

    keep = slice(None)
    if table_cap is not None and table_cap < scores.shape[0]:
        keep = slice(scores.shape[0] - table_cap, None)
    scores = scores[keep]
    label_idx = label_idx[keep]
    cov_rows = cov_rows[keep]
    stat_values = reduced.values[keep]

    labels = tuple(pool[i].id for i in label_idx)
    histogram = Counter(labels)
    if len(histogram) < 2:
        raise TrainingError(f"fewer than 2 distinct best-model labels: {dict(histogram)}")

    encoder = CovariateEncoder.fit(series, cov_rows)
    encoded = (
        np.vstack([encoder.encode(row) for row in cov_rows])
        if encoder.columns
        else np.empty((len(cov_rows), 0))
    )
    table = TrainingTable(
        columns=report.final_columns + encoder.columns,
        design=np.hstack([stat_values, encoded]),
        labels=labels,
        pool_ids=tuple(spec.id for spec in pool),
        scores=scores,
        metric=metric,
    )
    return BuildResult(table=table, report=report, encoder=encoder, skipped_windows=tuple(skipped))


def apply_discard_rule(
    table: TrainingTable, pool: tuple[PredictorSpec, ...]
) -> tuple[TrainingTable, tuple[PredictorSpec, ...], tuple[str, ...]]:
    """Remove predictors that win at most one window, relabeling their rows
    to the runner-up from the stored score vectors; repeats to a fixed
    point."""
    if tuple(spec.id for spec in pool) != table.pool_ids:
        raise DataError("pool does not match the training table")
    scores = table.scores
    active = list(range(len(pool)))
    row_keep = np.ones(table.n_rows, dtype=bool)

    def labels_for(active_cols: list[int]) -> np.ndarray:
        sub = scores[:, active_cols]
        out = np.full(table.n_rows, -1)
        for i in range(table.n_rows):
            if not row_keep[i]:
                continue
            row = sub[i]
            if np.all(np.isnan(row)):
                out[i] = -1
            else:
                out[i] = active_cols[int(np.nanargmin(row))]
        return out

    labels = labels_for(active)
    while True:
        wins = Counter(labels[row_keep])
        weak = [i for i in active if wins.get(i, 0) <= 1]
        if not weak:
            break
        remaining = [i for i in active if i not in weak]
        if not remaining:
            raise TrainingError(
                "discard rule would empty the predictor pool; win counts: "
                + str({pool[i].id: wins.get(i, 0) for i in active})
            )
        active = remaining
        labels = labels_for(active)
        dropped_rows = (labels == -1) & row_keep
        if dropped_rows.any():
            logger.info("discard rule dropped %d rows with no surviving scores", int(dropped_rows.sum()))
            row_keep &= labels != -1

    surviving = tuple(pool[i] for i in active)
    discarded = tuple(spec.id for spec in pool if spec.id not in {s.id for s in surviving})
    new_table = TrainingTable(
        columns=table.columns,
        design=table.design[row_keep],
        labels=tuple(pool[i].id for i in labels[row_keep]),
        pool_ids=tuple(spec.id for spec in surviving),
        scores=scores[np.ix_(row_keep, active)],
        metric=table.metric,
    )
    return new_table, surviving, discarded


@dataclass(frozen=True)
class CombinedForecast:
    """Probability-weighted combination of the pool forecasts."""

    ids: tuple[str, ...]
    values: np.ndarray
    weights: np.ndarray
    forecasts: np.ndarray

    def __post_init__(self) -> None:
        weights = np.asarray(self.weights, dtype=np.float64)
        if abs(float(weights.sum()) - 1.0) > 1e-9:
            raise DataError("combination weights must sum to 1")
        object.__setattr__(self, "weights", weights)

    def weight(self, predictor_id: str) -> float:
        return float(self.weights[self.ids.index(predictor_id)])


def combine(
    probabilities: ProbabilityVector,
    forecasts: list[Forecast] | tuple[Forecast, ...],
    top_k: int | None = None,
) -> CombinedForecast:
    """Weighted sum of forecasts; optionally restricted to the k most
    probable predictors (ties by pool order) with renormalized weights."""
    ids = tuple(f.predictor_id for f in forecasts)
    if ids != probabilities.ids:
        raise DataError(f"forecast ids {ids} do not match probability ids {probabilities.ids}")
    lengths = {f.values.size for f in forecasts}
    if len(lengths) != 1:
        raise DataError("forecasts disagree on horizon length")
    matrix = np.vstack([f.values for f in forecasts])

    weights = np.array(probabilities.values, dtype=np.float64)
    if top_k is not None and 0 < top_k < len(ids):
        order = np.argsort(-weights, kind="stable")
        dropped = order[top_k:]
        weights[dropped] = 0.0
        weights = weights / weights.sum()

    values = np.zeros(matrix.shape[1])
    for i, w in enumerate(weights):
        if w != 0.0:
            values = values + w * matrix[i]
    return CombinedForecast(ids=ids, values=values, weights=weights, forecasts=matrix)


@dataclass(frozen=True)
class TrainSettings:
    """Everything needed to (re)train an ensemble on a series."""

    n: int = 30
    m: int = 7
    stride: int = 1
    requested_splits: int | None = None
    metric: str = "MAE"
    top_k: int | None = None
    table_cap: int | None = None
    thresholds: ReductionThresholds = ReductionThresholds()
    enet: ElasticNetSelection = ElasticNetSelection()
    rule_config: RuleFitConfig = RuleFitConfig()

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "m": self.m,
            "stride": self.stride,
            "requested_splits": self.requested_splits,
            "metric": self.metric,
            "top_k": self.top_k,
            "table_cap": self.table_cap,
            "thresholds": {
                "null_frac": self.thresholds.null_frac,
                "similarity": self.thresholds.similarity,
                "corr": self.thresholds.corr,
            },
            "enet": {
                "alpha": self.enet.alpha,
                "l1_ratio": self.enet.l1_ratio,
                "min_coefficient": self.enet.min_coefficient,
            },
        }

    @classmethod
    def from_dict(cls, payload: dict, rule_config: RuleFitConfig) -> "TrainSettings":
        return cls(
            n=payload["n"],
            m=payload["m"],
            stride=payload["stride"],
            requested_splits=payload.get("requested_splits"),
            metric=payload["metric"],
            top_k=payload["top_k"],
            table_cap=payload["table_cap"],
            thresholds=ReductionThresholds(**payload["thresholds"]),
            enet=ElasticNetSelection(**payload["enet"]),
            rule_config=rule_config,
        )


@dataclass(frozen=True)
class TrainingSummary:
    label_histogram: dict[str, int]
    discarded: tuple[str, ...]
    skipped_windows: tuple[int, ...]
    n_rows: int
    n_rules: int


@dataclass(frozen=True)
class EnsembleModel:
    """Immutable trained snapshot: surviving pool, rule model, reduction
    report, standardization parameters, and the settings to retrain."""

    pool: tuple[PredictorSpec, ...]
    full_pool: tuple[PredictorSpec, ...]
    discarded: tuple[str, ...]
    rule_model: RuleModel
    reduction: ReductionReport
    standardization: StandardizationParams
    encoder: CovariateEncoder
    settings: TrainSettings

    def __post_init__(self) -> None:
        if not self.pool:
            raise DataError("ensemble pool must be non-empty")
        if self.rule_model.class_ids != tuple(spec.id for spec in self.pool):
            raise DataError("rule model class ids do not match the pool")


def train_ensemble(
    series: TimeSeries,
    pool: tuple[PredictorSpec, ...],
    settings: TrainSettings = TrainSettings(),
    catalog: FeatureCatalog | None = None,
    workers: int = 1,
) -> tuple[EnsembleModel, TrainingSummary]:
    """Full training pipeline on original-scale data."""
    catalog = catalog or default_catalog()
    _, params = standardize(series)
    plan = plan_splits(
        series, settings.n, settings.m, requested_splits=settings.requested_splits, stride=settings.stride
    )
    build = build_training_table(
        series,
        params,
        plan,
        pool,
        catalog,
        settings.metric,
        thresholds=settings.thresholds,
        enet=settings.enet,
        table_cap=settings.table_cap,
        workers=workers,
    )
    table, surviving, discarded = apply_discard_rule(build.table, pool)
    rule_model = fit_rule_model(table, settings.rule_config, catalog.version)
    model = EnsembleModel(
        pool=surviving,
        full_pool=pool,
        discarded=discarded,
        rule_model=rule_model,
        reduction=build.report,
        standardization=params,
        encoder=build.encoder,
        settings=settings,
    )
    summary = TrainingSummary(
        label_histogram=table.label_histogram(),
        discarded=discarded,
        skipped_windows=build.skipped_windows,
        n_rows=table.n_rows,
        n_rules=len(rule_model.rules),
    )
    return model, summary


def _feature_row(model: EnsembleModel, series: TimeSeries, catalog: FeatureCatalog) -> np.ndarray:
    n = model.settings.n
    z = model.standardization.apply(series.target)
    window = z[-n:]
    full = extract_features(window, catalog)
    name_index = {name: i for i, name in enumerate(catalog.names)}
    stat_row = np.array([full[name_index[c]] for c in model.reduction.final_columns])
    covs = tuple(c.take(slice(len(series) - n, len(series))) for c in series.covariates)
    encoded = model.encoder.encode(aggregate_covariates(covs)) if model.encoder.columns else np.empty(0)
    return np.concatenate([stat_row, encoded])


def predict_next(model: EnsembleModel, series: TimeSeries, horizon: int | None = None) -> CombinedForecast:
    """Featurize the last n points, weight the pool by the rule model, and
    combine the (inverse-standardized) pool forecasts."""
    catalog = default_catalog()
    if model.rule_model.catalog_version != catalog.version:
        raise DataError(
            f"model was fitted with feature catalog {model.rule_model.catalog_version!r} "
            f"but this build provides {catalog.version!r}; retrain the model"
        )
    n = model.settings.n
    horizon = horizon or model.settings.m
    if len(series) < n:
        raise DataError(f"need at least {n} recent points, got {len(series)}")
    row = _feature_row(model, series, catalog)
    probabilities = predict_proba(model.rule_model, row)
    window = model.standardization.apply(series.target)[-n:]
    forecasts = []
    for spec in model.pool:
        raw = fit_predict(spec, window, horizon)
        forecasts.append(
            Forecast(
                values=model.standardization.invert(raw.values),
                predictor_id=raw.predictor_id,
                fallback=raw.fallback,
            )
        )
    return combine(probabilities, forecasts, model.settings.top_k)


@dataclass(frozen=True)
class StreamEvent:
    """One drift-detector firing during the online loop."""

    timestamp: np.datetime64
    statistic: float
    threshold: float
    retrain_allowed: bool
    retrained: bool
    new_rule_count: int | None

    def to_dict(self) -> dict:
        return {
            "timestamp": str(self.timestamp),
            "statistic": self.statistic,
            "threshold": self.threshold,
            "retrain_allowed": self.retrain_allowed,
            "retrained": self.retrained,
            "new_rule_count": self.new_rule_count,
        }


@dataclass(frozen=True)
class DriftSettings:
    detector: str = "kswin"
    window_size: int = 100
    sample_size: int = 30
    alpha: float = 0.005
    delta: float = 0.002
    min_interval_steps: int = 14
    seed: int = 0

    def __post_init__(self) -> None:
        if self.detector not in ("kswin", "adwin"):
            raise DataError(f"unknown drift detector {self.detector!r}")
        if self.min_interval_steps < 0:
            raise DataError("min_interval_steps must be >= 0")

    def build_detector(self):
        if self.detector == "kswin":
            return KswinDetector(
                window_size=self.window_size,
                sample_size=self.sample_size,
                alpha=self.alpha,
                seed=self.seed,
            )
        return AdwinDetector(delta=self.delta)


class OnlineForecaster:
    """Single-writer stream wrapper around an immutable model snapshot.

    New points are appended to the stored history and fed (standardized
    with the first-trained parameters, which keeps the detector stream's
    scale fixed across retrains) to the drift detector.  When it fires and
    the guard allows, the whole pipeline retrains on the capped history
    with the full pool readmitted; forecasts always come from the current
    snapshot.
    """

    def __init__(
        self,
        model: EnsembleModel,
        history: TimeSeries,
        drift: DriftSettings = DriftSettings(),
        workers: int = 1,
        warm_start: bool = True,
    ) -> None:
        self.model = model
        self.history = history
        self.drift = drift
        self.workers = workers
        self._detector = drift.build_detector()
        self._detector_params = model.standardization
        self._guard = RetrainGuard(min_interval=history.delta * drift.min_interval_steps)
        self.events: list[StreamEvent] = []
        if warm_start:
            for value in self._detector_params.apply(history.target):
                self._detector.update(float(value))

    def observe(self, points: TimeSeries) -> list[StreamEvent]:
        """Append contiguous points, run drift detection, maybe retrain."""
        new_events: list[StreamEvent] = []
        for i in range(len(points)):
            row = points.take(slice(i, i + 1))
            self.history = self.history.append(row)
            timestamp = row.timestamps[0]
            value = float(self._detector_params.apply(row.target)[0])
            fired: DriftEvent | None = self._detector.update(value)
            if fired is None:
                continue
            allowed = self._guard.allows(timestamp)
            retrained = False
            rule_count = None
            if allowed:
                self._retrain()
                self._guard.record(timestamp)
                retrained = True
                rule_count = len(self.model.rule_model.rules)
            event = StreamEvent(
                timestamp=timestamp,
                statistic=fired.statistic,
                threshold=fired.threshold,
                retrain_allowed=allowed,
                retrained=retrained,
                new_rule_count=rule_count,
            )
            new_events.append(event)
            self.events.append(event)
        return new_events

    def forecast(self, horizon: int | None = None) -> CombinedForecast:
        return predict_next(self.model, self.history, horizon)

    def step(self, points: TimeSeries, horizon: int | None = None) -> tuple[list[StreamEvent], CombinedForecast]:
        """Spec surface: append points, retrain if drift fires and the
        guard allows, then forecast from the current snapshot."""
        events = self.observe(points)
        return events, self.forecast(horizon)

    def _retrain(self) -> None:
        model, summary = train_ensemble(
            self.history,
            self.model.full_pool,
            settings=self.model.settings,
            workers=self.workers,
        )
        logger.info(
            "retrained on %d rows (%d rules, discarded %s)",
            summary.n_rows,
            summary.n_rules,
            list(summary.discarded) or "none",
        )
        self.model = model


def save_model(model: EnsembleModel, directory: str | Path) -> None:
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    payload = {
        "format_version": 1,
        "pool": [spec.to_dict() for spec in model.pool],
        "full_pool": [spec.to_dict() for spec in model.full_pool],
        "discarded": list(model.discarded),
        "settings": model.settings.to_dict(),
        "encoder": model.encoder.to_dict(),
    }
    (directory / MODEL_FILE).write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    (directory / RULES_FILE).write_text(model.rule_model.to_json() + "\n", encoding="utf-8")
    (directory / REDUCTION_FILE).write_text(model.reduction.to_json() + "\n", encoding="utf-8")
    standardization = {"mean": model.standardization.mean, "std_dev": model.standardization.std_dev}
    (directory / STANDARDIZATION_FILE).write_text(
        json.dumps(standardization, indent=2, sort_keys=True) + "\n", encoding="utf-8"
    )


def load_model(directory: str | Path) -> EnsembleModel:
    directory = Path(directory)
    try:
        payload = json.loads((directory / MODEL_FILE).read_text(encoding="utf-8"))
        rules = json.loads((directory / RULES_FILE).read_text(encoding="utf-8"))
        reduction = json.loads((directory / REDUCTION_FILE).read_text(encoding="utf-8"))
        standardization = json.loads((directory / STANDARDIZATION_FILE).read_text(encoding="utf-8"))
    except FileNotFoundError as exc:
        raise DataError(f"model directory {directory} is incomplete: {exc}") from exc
    if payload.get("format_version") != 1:
        raise DataError("unsupported model format")
    rule_model = RuleModel.from_dict(rules)
    return EnsembleModel(
        pool=tuple(PredictorSpec.from_dict(p) for p in payload["pool"]),
        full_pool=tuple(PredictorSpec.from_dict(p) for p in payload["full_pool"]),
        discarded=tuple(payload["discarded"]),
        rule_model=rule_model,
        reduction=ReductionReport.from_dict(reduction),
        standardization=StandardizationParams(**standardization),
        encoder=CovariateEncoder.from_dict(payload["encoder"]),
        settings=TrainSettings.from_dict(payload["settings"], rule_model.config),
    )
