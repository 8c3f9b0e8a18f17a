"""Interpretable ensemble forecasting with rule-based model selection and
drift-triggered retraining."""

from .drift import AdwinDetector, DriftEvent, KswinDetector, RetrainGuard, ks_statistic
from .ensemble import (
    CombinedForecast,
    DriftSettings,
    EnsembleModel,
    OnlineForecaster,
    TrainingTable,
    TrainSettings,
    aggregate_covariates,
    apply_discard_rule,
    build_training_table,
    combine,
    label_best_model,
    load_model,
    predict_next,
    save_model,
    train_ensemble,
)
from .errors import ConfigError, DataError, DriftcastError, PredictorError, TrainingError
from .evaluation import BacktestPlan, ScoreReport, run_backtest
from .features import (
    FeatureCatalog,
    FeatureMatrix,
    ReductionReport,
    default_catalog,
    extract_features,
    reduce_features,
)
from .metrics import mae, mape, mse
from .optim import ElasticNetSpec, LinearFit, fit_elastic_net, fit_l1_logistic
from .predictors import Forecast, PredictorSpec, default_models_db, fit_predict
from .rulefit import ProbabilityVector, Rule, RuleFitConfig, RuleModel, explain, fit_rule_model, predict_proba
from .series import (
    ColumnSchema,
    Covariate,
    SplitPlan,
    StandardizationParams,
    TimeSeries,
    WindowSplit,
    add_date_covariates,
    ingest_csv,
    plan_splits,
    standardize,
    write_csv,
)
from .synthetic import Segment, make_regime_series

__version__ = "0.1.0"

__all__ = [
    "AdwinDetector",
    "BacktestPlan",
    "ColumnSchema",
    "CombinedForecast",
    "ConfigError",
    "Covariate",
    "DataError",
    "DriftEvent",
    "DriftSettings",
    "DriftcastError",
    "ElasticNetSpec",
    "EnsembleModel",
    "FeatureCatalog",
    "FeatureMatrix",
    "Forecast",
    "KswinDetector",
    "LinearFit",
    "OnlineForecaster",
    "PredictorError",
    "PredictorSpec",
    "ProbabilityVector",
    "ReductionReport",
    "RetrainGuard",
    "Rule",
    "RuleFitConfig",
    "RuleModel",
    "ScoreReport",
    "Segment",
    "SplitPlan",
    "StandardizationParams",
    "TimeSeries",
    "TrainSettings",
    "TrainingError",
    "TrainingTable",
    "WindowSplit",
    "add_date_covariates",
    "aggregate_covariates",
    "apply_discard_rule",
    "build_training_table",
    "combine",
    "default_catalog",
    "default_models_db",
    "explain",
    "extract_features",
    "fit_elastic_net",
    "fit_l1_logistic",
    "fit_predict",
    "fit_rule_model",
    "ingest_csv",
    "ks_statistic",
    "label_best_model",
    "load_model",
    "mae",
    "make_regime_series",
    "mape",
    "mse",
    "plan_splits",
    "predict_next",
    "predict_proba",
    "reduce_features",
    "run_backtest",
    "save_model",
    "standardize",
    "train_ensemble",
    "write_csv",
]
