"""Base predictor contracts: fixed recursions, oracles, and shared properties."""

import numpy as np
import pytest

from driftcast.errors import DataError, PredictorError
from driftcast.predictors import PredictorSpec, default_models_db, fit_predict


def spec(kind, **params):
    return PredictorSpec(id=kind, kind=kind, params=params)


class TestContracts:
    def test_ses_alpha_one_is_naive(self):
        forecast = fit_predict(spec("ses", smoothing=1.0), np.array([1.0, 5.0, 3.0]), 2)
        np.testing.assert_array_equal(forecast.values, [3.0, 3.0])

    def test_seasonal_naive_pattern_copy(self):
        forecast = fit_predict(spec("seasonal_naive", season_length=2), np.array([1.0, 2.0, 3.0, 4.0]), 3)
        np.testing.assert_array_equal(forecast.values, [3.0, 4.0, 3.0])

    def test_drift_line(self):
        forecast = fit_predict(spec("drift"), np.array([1.0, 2.0, 3.0]), 3)
        np.testing.assert_allclose(forecast.values, [4.0, 5.0, 6.0])

    def test_ar_recovers_noiseless_ar1(self):
        x = np.empty(50)
        x[0] = 1.0
        for t in range(1, 50):
            x[t] = 0.8 * x[t - 1]
        forecast = fit_predict(spec("ar_ols", order=1), x, 5)
        expected = x[-1] * 0.8 ** np.arange(1, 6)
        np.testing.assert_allclose(forecast.values, expected, atol=1e-6)

    def test_holt_winters_matches_reference_recursion(self):
        # Independent reimplementation of the documented additive recursion:
        # level = season-1 mean, trend = mean first-difference over the first
        # two seasons, seasonal indices = first-season deviations.
        rng = np.random.default_rng(5)
        x = rng.normal(20.0, 3.0, size=33)
        s, a, b, g = 6, 0.2, 0.1, 0.1
        level = float(np.mean(x[:s]))
        trend = float(np.mean(np.diff(x[: 2 * s])))
        seasonal = list(x[:s] - level)
        for t in range(s, x.size):
            prev = level
            idx = t % s
            level = a * (x[t] - seasonal[idx]) + (1 - a) * (level + trend)
            trend = b * (level - prev) + (1 - b) * trend
            seasonal[idx] = g * (x[t] - level) + (1 - g) * seasonal[idx]
        expected = [level + h * trend + seasonal[(x.size + h - 1) % s] for h in range(1, 5)]

        forecast = fit_predict(spec("holt_winters", season_length=s), x, 4)
        np.testing.assert_allclose(forecast.values, expected, atol=1e-12)

    def test_seasonal_ar_matches_reference_lag_regression(self):
        # Independent oracle: least squares on lags {1, 2, s} plus intercept,
        # then iterated forecasting.
        rng = np.random.default_rng(6)
        x = np.empty(60)
        x[:4] = rng.normal(10.0, 1.0, 4)
        for t in range(4, 60):
            x[t] = 2.0 + 0.4 * x[t - 1] + 0.35 * x[t - 4] + rng.normal(0.0, 0.2)
        lags = [1, 2, 4]
        design = np.column_stack([x[4 - lag : 60 - lag] for lag in lags] + [np.ones(56)])
        coef, *_ = np.linalg.lstsq(design, x[4:], rcond=None)
        history = list(x)
        expected = []
        for _ in range(6):
            value = coef[-1] + sum(coef[k] * history[-lag] for k, lag in enumerate(lags))
            history.append(value)
            expected.append(value)

        forecast = fit_predict(spec("seasonal_ar", order=2, season_length=4), x, 6)
        np.testing.assert_allclose(forecast.values, expected, atol=1e-9)
        assert forecast.fallback is None

    def test_exactly_collinear_seasonal_system_falls_back(self):
        # A noiseless sinusoid makes the lag columns linearly dependent, so
        # the least-squares system is degenerate and drift takes over.
        t = np.arange(40)
        x = np.sin(2 * np.pi * t / 8) * 3.0 + 5.0
        forecast = fit_predict(spec("seasonal_ar", order=2, season_length=8), x, 8)
        assert forecast.fallback == "drift"

    def test_constant_series_ar_falls_back_to_drift(self):
        forecast = fit_predict(spec("ar_ols", order=2), np.full(20, 4.0), 3)
        assert forecast.fallback == "drift"
        np.testing.assert_array_equal(forecast.values, [4.0, 4.0, 4.0])

    def test_insufficient_history(self):
        with pytest.raises(PredictorError, match="at least"):
            fit_predict(spec("seasonal_naive", season_length=7), np.arange(5.0), 2)

    def test_bad_horizon(self):
        with pytest.raises(PredictorError):
            fit_predict(spec("drift"), np.arange(5.0), 0)

    def test_nonfinite_train_rejected(self):
        with pytest.raises(PredictorError):
            fit_predict(spec("drift"), np.array([1.0, np.nan, 2.0]), 1)


class TestSharedProperties:
    KINDS = (
        ("seasonal_naive", {"season_length": 5}),
        ("drift", {}),
        ("ses", {"smoothing": 0.3}),
        ("holt_winters", {"season_length": 5}),
        ("ar_ols", {"order": 3}),
        ("seasonal_ar", {"order": 2, "season_length": 5}),
    )

    def test_horizon_contract(self):
        rng = np.random.default_rng(0)
        train = rng.normal(10.0, 2.0, size=30)
        for kind, params in self.KINDS:
            for horizon in (1, 4, 11):
                forecast = fit_predict(spec(kind, **params), train, horizon)
                assert forecast.values.size == horizon
                assert np.all(np.isfinite(forecast.values))

    def test_shift_equivariance_exact(self):
        rng = np.random.default_rng(1)
        train = rng.normal(size=25)
        for kind, params in (
            ("seasonal_naive", {"season_length": 5}),
            ("drift", {}),
            ("ses", {"smoothing": 0.4}),
            ("holt_winters", {"season_length": 5}),
        ):
            base = fit_predict(spec(kind, **params), train, 6).values
            shifted = fit_predict(spec(kind, **params), train + 100.0, 6).values
            np.testing.assert_allclose(shifted, base + 100.0, atol=1e-9)

    def test_determinism(self):
        rng = np.random.default_rng(2)
        train = rng.normal(size=40)
        for kind, params in self.KINDS:
            a = fit_predict(spec(kind, **params), train, 7).values
            b = fit_predict(spec(kind, **params), train, 7).values
            assert np.array_equal(a, b)

    def test_seasonal_naive_beats_ses_on_periodic_data(self):
        # Regime-specialization sanity check: on an (offset) sinusoid with
        # period s, copying the last season must beat a flat level forecast.
        from driftcast.metrics import mape

        s = 6
        t = np.arange(5 * s + s)
        series = 10.0 + np.sin(2 * np.pi * t / s)
        train, actual = series[: 5 * s], series[5 * s :]
        seasonal = fit_predict(spec("seasonal_naive", season_length=s), train, s).values
        flat = fit_predict(spec("ses", smoothing=0.3), train, s).values
        assert mape(actual, seasonal) < mape(actual, flat)


class TestModelsDb:
    def test_six_unique_specs(self):
        db = default_models_db(season_length=7)
        assert len(db) == 6
        assert len({p.id for p in db}) == 6

    def test_season_length_passthrough(self):
        db = default_models_db(season_length=7)
        by_id = {p.id: p for p in db}
        assert by_id["holt_winters"].params["season_length"] == 7
        assert by_id["seasonal_naive"].params["season_length"] == 7
        assert by_id["seasonal_ar"].params["season_length"] == 7

    def test_ids_stable_across_calls(self):
        assert [p.id for p in default_models_db(7)] == [p.id for p in default_models_db(7)]

    def test_param_validation(self):
        with pytest.raises(DataError):
            PredictorSpec("x", "ses", {"smoothing": 1.5})
        with pytest.raises(DataError):
            PredictorSpec("x", "ar_ols", {"order": 0})
        with pytest.raises(DataError):
            PredictorSpec("x", "seasonal_naive", {})
        with pytest.raises(DataError):
            PredictorSpec("x", "unknown_kind")

    def test_spec_round_trip(self):
        original = PredictorSpec("hw", "holt_winters", {"season_length": 5, "level": 0.3})
        again = PredictorSpec.from_dict(original.to_dict())
        assert again == original
