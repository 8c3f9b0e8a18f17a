"""Command-line front end: train, predict, backtest, explain,
simulate-stream, and make-synthetic.

Every command is deterministic given (config, seed); all outputs land
under the configured output directory.  Exit codes: 0 success, 1 IO/data
error, 2 config error, 3 training infeasibility.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

import numpy as np

from .config import RunConfig, load_config
from .ensemble import (
    EnsembleModel,
    OnlineForecaster,
    load_model,
    predict_next,
    save_model,
    train_ensemble,
)
from .errors import ConfigError, DataError, DriftcastError, TrainingError
from .evaluation import BacktestPlan, run_backtest
from .rulefit import explain as explain_rules
from .rulefit import render_explanation
from .series import ColumnSchema, TimeSeries, add_date_covariates, ingest_csv, write_csv
from .synthetic import make_regime_series, write_segments

logger = logging.getLogger(__name__)

INGEST_FILE = "ingest.json"


def _load_series(config: RunConfig) -> TimeSeries:
    series = ingest_csv(config.data.path, config.data.schema())
    if config.data.date_parts:
        series = add_date_covariates(series, config.data.date_parts)
    return series


def _load_series_for_model(model_dir: Path, data_path: str) -> TimeSeries:
    meta_path = model_dir / INGEST_FILE
    if not meta_path.exists():
        raise DataError(f"model directory {model_dir} is missing {INGEST_FILE}")
    meta = json.loads(meta_path.read_text(encoding="utf-8"))
    schema = ColumnSchema(
        date=meta["date_column"],
        target=meta["target_column"],
        numeric=tuple(meta["numeric_covariates"]),
        categorical=tuple(meta["categorical_covariates"]),
    )
    series = ingest_csv(data_path, schema)
    if meta["date_parts"]:
        series = add_date_covariates(series, tuple(meta["date_parts"]))
    return series


def cmd_train(config: RunConfig) -> int:
    series = _load_series(config)
    model, summary = train_ensemble(series, config.pool(), config.train, workers=config.workers)
    model_dir = Path(config.output_dir) / "model"
    save_model(model, model_dir)
    (model_dir / INGEST_FILE).write_text(
        json.dumps(config.data.to_dict(), indent=2, sort_keys=True) + "\n", encoding="utf-8"
    )
    print(f"model written to {model_dir}")
    print("label histogram:")
    for pid, count in summary.label_histogram.items():
        print(f"  {pid}: {count}")
    print(f"discarded predictors: {list(summary.discarded) or 'none'}")
    if summary.skipped_windows:
        print(f"skipped windows: {len(summary.skipped_windows)}")
    top = explain_rules(model.rule_model, top_k=5, order="support")
    if top:
        print("top rules by support:")
        print(render_explanation(top))
    else:
        print("no rules retained (intercept-only model)")
    return 0


def _write_forecast_csv(
    handle,
    model: EnsembleModel,
    series: TimeSeries,
    forecast,
) -> None:
    delta = series.delta
    last = series.timestamps[-1]
    ids = forecast.ids
    handle.write("timestamp,forecast," + ",".join(f"weight_{pid}" for pid in ids) + "\n")
    for h in range(forecast.values.size):
        stamp = np.datetime_as_string(last + delta * (h + 1), unit="s")
        weights = ",".join(repr(float(w)) for w in forecast.weights)
        handle.write(f"{stamp},{forecast.values[h]!r},{weights}\n")


def cmd_predict(model_dir: str, data_path: str, horizon: int | None, output: str | None) -> int:
    directory = Path(model_dir)
    model = load_model(directory)
    series = _load_series_for_model(directory, data_path)
    forecast = predict_next(model, series, horizon)
    if output:
        path = Path(output)
        path.parent.mkdir(parents=True, exist_ok=True)
        with path.open("w", encoding="utf-8") as handle:
            _write_forecast_csv(handle, model, series, forecast)
        print(f"forecast written to {path}")
    else:
        _write_forecast_csv(sys.stdout, model, series, forecast)
    return 0


def cmd_backtest(config: RunConfig) -> int:
    series = _load_series(config)
    plan = BacktestPlan.for_length(
        len(series), train_fraction=config.backtest.train_fraction, step=config.backtest.step
    )
    report = run_backtest(
        series,
        plan,
        singles=config.pool(),
        ensemble_settings=config.train,
        ensemble_pool=config.pool(),
        drift=config.drift,
        workers=config.workers,
    )
    out_dir = Path(config.output_dir) / "backtest"
    report.write(out_dir)
    print(f"backtest report written to {out_dir}")
    for name in sorted(report.models):
        score = report.models[name]
        print(f"  {name}: mean MAPE {score.mean_mape:.3f}% over {len(plan.folds)} folds "
              f"({len(score.invalid_folds)} invalid)")
    return 0


def cmd_explain(model_dir: str, top_k: int | None, order: str, fmt: str) -> int:
    model = load_model(Path(model_dir))
    entries = explain_rules(model.rule_model, top_k=top_k, order=order)
    if fmt == "json":
        print(json.dumps(entries, indent=2, sort_keys=True))
    else:
        print(render_explanation(entries) if entries else "no rules retained")
    return 0


def cmd_simulate_stream(config: RunConfig) -> int:
    series = _load_series(config)
    train_size = int(config.backtest.train_fraction * len(series))
    if train_size < config.train.n + config.train.m:
        raise DataError("training fraction too small for the configured windows")
    initial = series.take(slice(0, train_size))
    model, _ = train_ensemble(initial, config.pool(), config.train, workers=config.workers)
    runner = OnlineForecaster(model, initial, drift=config.drift, workers=config.workers)

    out_dir = Path(config.output_dir) / "stream"
    out_dir.mkdir(parents=True, exist_ok=True)
    events_path = out_dir / "events.jsonl"
    forecasts_path = out_dir / "forecasts.csv"
    ids = tuple(spec.id for spec in config.pool())
    with events_path.open("w", encoding="utf-8") as events_file, forecasts_path.open(
        "w", encoding="utf-8"
    ) as forecast_file:
        forecast_file.write(
            "timestamp,actual,forecast_next,retrained," + ",".join(f"weight_{pid}" for pid in ids) + "\n"
        )
        for i in range(train_size, len(series)):
            point = series.take(slice(i, i + 1))
            events, forecast = runner.step(point)
            retrained = any(e.retrained for e in events)
            for event in events:
                events_file.write(json.dumps(event.to_dict(), sort_keys=True) + "\n")
            weights = {pid: 0.0 for pid in ids}
            for pid in forecast.ids:
                weights[pid] = forecast.weight(pid)
            stamp = np.datetime_as_string(point.timestamps[0], unit="s")
            forecast_file.write(
                f"{stamp},{float(point.target[0])!r},{float(forecast.values[0])!r},{int(retrained)},"
                + ",".join(repr(weights[pid]) for pid in ids)
                + "\n"
            )
    n_events = len(runner.events)
    n_retrains = sum(1 for e in runner.events if e.retrained)
    print(f"stream replay written to {out_dir} ({n_events} drift events, {n_retrains} retrains)")
    return 0


def cmd_make_synthetic(output: str, seed: int, cycles: int, segment_length: int, season_length: int) -> int:
    out_dir = Path(output)
    out_dir.mkdir(parents=True, exist_ok=True)
    series, segments = make_regime_series(
        seed=seed, cycles=cycles, segment_length=segment_length, season_length=season_length
    )
    write_csv(series, out_dir / "data.csv")
    write_segments(segments, out_dir / "segments.json")
    config = {
        "seed": seed,
        "output_dir": str(out_dir / "out"),
        "data": {
            "path": str(out_dir / "data.csv"),
            "date_column": "date",
            "target_column": "target",
            "categorical_covariates": ["regime_hint"],
        },
        "model": {
            "n": 30,
            "m": 7,
            "season_length": season_length,
            "metric": "MAE",
            "table_cap": 300,
            # Five predictors with disjoint inductive biases: the short-memory
            # AR (order < season length) cannot imitate the seasonal copier.
            "predictors": [
                {"id": "seasonal_naive", "kind": "seasonal_naive", "params": {"season_length": season_length}},
                {"id": "drift", "kind": "drift"},
                {"id": "ses", "kind": "ses", "params": {"smoothing": 0.3}},
                {"id": "holt_winters", "kind": "holt_winters", "params": {"season_length": season_length}},
                {"id": "ar_ols", "kind": "ar_ols", "params": {"order": max(2, season_length - 2)}},
            ],
        },
        # The 40-statistic catalog needs a lighter selection penalty than
        # the production default tuned for very wide matrices.
        "features": {"enet_alpha": 0.2},
        "rules": {"n_trees": 50},
        "backtest": {"train_fraction": 0.4, "step": 7},
    }
    (out_dir / "config.json").write_text(json.dumps(config, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    print(f"synthetic benchmark written to {out_dir} (data.csv, segments.json, config.json)")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="driftcast", description=__doc__)
    parser.add_argument("-v", "--verbose", action="store_true", help="debug logging")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_config_options(p: argparse.ArgumentParser) -> None:
        p.add_argument("--config", required=True, help="JSON config file")
        p.add_argument("--data", help="override data.path")
        p.add_argument("--output-dir", help="override output_dir")
        p.add_argument("--seed", type=int, help="override seed")
        p.add_argument("--workers", type=int, help="override worker count")

    p_train = sub.add_parser("train", help="build the training table and fit the ensemble")
    add_config_options(p_train)

    p_predict = sub.add_parser("predict", help="forecast from a saved model")
    p_predict.add_argument("--model-dir", required=True)
    p_predict.add_argument("--data", required=True, help="CSV with at least the model's window of history")
    p_predict.add_argument("--horizon", type=int, default=None)
    p_predict.add_argument("--output", default=None, help="CSV path (default: stdout)")

    p_backtest = sub.add_parser("backtest", help="blocked cross-validation of ensemble vs singles")
    add_config_options(p_backtest)

    p_explain = sub.add_parser("explain", help="list the fitted rules")
    p_explain.add_argument("--model-dir", required=True)
    p_explain.add_argument("--top-k", type=int, default=None)
    p_explain.add_argument("--order", choices=["support", "coefficient-magnitude"], default="support")
    p_explain.add_argument("--format", dest="fmt", choices=["text", "json"], default="text")

    p_stream = sub.add_parser("simulate-stream", help="replay the evaluation region point by point")
    add_config_options(p_stream)

    p_synth = sub.add_parser("make-synthetic", help="write the bundled regime-switching benchmark")
    p_synth.add_argument("--output", required=True)
    p_synth.add_argument("--seed", type=int, default=0)
    p_synth.add_argument("--cycles", type=int, default=3)
    p_synth.add_argument("--segment-length", type=int, default=100)
    p_synth.add_argument("--season-length", type=int, default=7)

    return parser


def _config_from_args(args: argparse.Namespace) -> RunConfig:
    overrides = {
        "data_path": args.data,
        "output_dir": args.output_dir,
        "seed": args.seed,
        "workers": args.workers,
    }
    return load_config(args.config, overrides)


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        if args.command == "train":
            return cmd_train(_config_from_args(args))
        if args.command == "predict":
            return cmd_predict(args.model_dir, args.data, args.horizon, args.output)
        if args.command == "backtest":
            return cmd_backtest(_config_from_args(args))
        if args.command == "explain":
            return cmd_explain(args.model_dir, args.top_k, args.order, args.fmt)
        if args.command == "simulate-stream":
            return cmd_simulate_stream(_config_from_args(args))
        if args.command == "make-synthetic":
            return cmd_make_synthetic(
                args.output, args.seed, args.cycles, args.segment_length, args.season_length
            )
        raise ConfigError(f"unknown command {args.command!r}")
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except TrainingError as exc:
        print(f"training error: {exc}", file=sys.stderr)
        return 3
    except (DataError, OSError) as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return 1
    except DriftcastError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
