"""Coordinate-descent solvers against closed forms, OLS, KKT, and finite differences."""

import numpy as np
import pytest

from driftcast.errors import DataError, TrainingError
from driftcast.optim import (
    ElasticNetSpec,
    elastic_net_objective,
    fit_elastic_net,
    fit_l1_logistic,
    logistic_loss,
)


def soft_threshold(value, threshold):
    if value > threshold:
        return value - threshold
    if value < -threshold:
        return value + threshold
    return 0.0


def standardized_column(rng, n):
    x = rng.normal(size=n)
    x = x - x.mean()
    return x / x.std()


class TestElasticNetOracles:
    def test_pure_ols_exact_line(self):
        fit = fit_elastic_net(np.array([[1.0], [2.0]]), np.array([2.0, 4.0]), ElasticNetSpec(alpha=0.0))
        assert fit.weights[0] == pytest.approx(2.0, abs=1e-9)
        assert fit.intercept == pytest.approx(0.0, abs=1e-9)

    def test_soft_threshold_kills_weak_coordinate(self):
        rng = np.random.default_rng(0)
        x = standardized_column(rng, 50)
        y = rng.normal(size=50)
        y = y - y.mean()
        # Shrink y until the inner product is below the L1 threshold.
        inner = abs(float(x @ y) / 50)
        spec = ElasticNetSpec(alpha=0.9, l1_ratio=0.7)
        y = y * (0.5 * spec.alpha * spec.l1_ratio / inner)
        fit = fit_elastic_net(x[:, None], y, spec)
        assert fit.weights[0] == 0.0

    def test_univariate_closed_form_100_draws(self):
        # w = S(<x, y>/n, alpha*rho) / (1 + alpha*(1-rho)) for a
        # population-standardized column and centered targets.
        rng = np.random.default_rng(42)
        for _ in range(100):
            n = int(rng.integers(10, 60))
            x = standardized_column(rng, n)
            y = rng.normal(scale=rng.uniform(0.1, 3.0), size=n)
            alpha = float(rng.uniform(0.0, 2.0))
            rho = float(rng.uniform(0.0, 1.0))
            spec = ElasticNetSpec(alpha=alpha, l1_ratio=rho, tol=1e-10)
            fit = fit_elastic_net(x[:, None], y, spec)
            yc = y - y.mean()
            expected = soft_threshold(float(x @ yc) / n, alpha * rho) / (1.0 + alpha * (1.0 - rho))
            assert fit.weights[0] == pytest.approx(expected, abs=1e-8)

    def test_alpha_zero_matches_normal_equations(self):
        rng = np.random.default_rng(7)
        for _ in range(20):
            X = rng.normal(size=(5, 3))
            y = rng.normal(size=5)
            fit = fit_elastic_net(X, y, ElasticNetSpec(alpha=0.0, tol=1e-12, max_iters=50_000))
            ones = np.column_stack([X, np.ones(5)])
            coef, *_ = np.linalg.lstsq(ones, y, rcond=None)
            np.testing.assert_allclose(fit.weights, coef[:3], atol=1e-8)
            assert fit.intercept == pytest.approx(coef[3], abs=1e-8)

    def test_scaling_equivariance(self):
        rng = np.random.default_rng(8)
        X = rng.normal(size=(20, 4))
        y = rng.normal(size=20)
        base = fit_elastic_net(X, y, ElasticNetSpec(alpha=0.0, tol=1e-12))
        scaled = fit_elastic_net(X, 3.5 * y, ElasticNetSpec(alpha=0.0, tol=1e-12))
        np.testing.assert_allclose(scaled.weights, 3.5 * base.weights, atol=1e-7)


def kkt_residual(X, y, fit, spec):
    """Max KKT violation of the elastic-net stationarity conditions."""
    n = X.shape[0]
    Xc = X - X.mean(axis=0)
    yc = y - y.mean()
    residual = yc - Xc @ fit.weights
    gradient = -Xc.T @ residual / n + spec.alpha * (1 - spec.l1_ratio) * fit.weights
    l1 = spec.alpha * spec.l1_ratio
    worst = 0.0
    for j, w in enumerate(fit.weights):
        if w == 0.0:
            worst = max(worst, max(0.0, abs(gradient[j]) - l1))
        else:
            worst = max(worst, abs(gradient[j] + l1 * np.sign(w)))
    return worst


class TestElasticNetProperties:
    def test_kkt_residual_random_configs(self):
        rng = np.random.default_rng(11)
        for _ in range(100):
            n = int(rng.integers(15, 50))
            p = int(rng.integers(1, 8))
            X = rng.normal(size=(n, p))
            X = (X - X.mean(axis=0)) / X.std(axis=0)
            y = rng.normal(size=n)
            spec = ElasticNetSpec(alpha=float(rng.uniform(0, 1.5)), l1_ratio=float(rng.uniform(0, 1)))
            fit = fit_elastic_net(X, y, spec)
            assert kkt_residual(X, y, fit, spec) <= 10 * spec.tol

    def test_objective_trace_non_increasing(self):
        rng = np.random.default_rng(12)
        X = rng.normal(size=(30, 6))
        y = rng.normal(size=30)
        fit = fit_elastic_net(X, y, ElasticNetSpec(alpha=0.3, l1_ratio=0.5))
        trace = np.array(fit.objective_trace)
        assert np.all(np.diff(trace) <= 1e-12)
        assert fit.final_objective == trace[-1]

    def test_gradient_matches_finite_differences(self):
        rng = np.random.default_rng(13)
        for _ in range(10):
            n, p = 12, 3
            X = rng.normal(size=(n, p))
            y = rng.normal(size=n)
            w = rng.normal(size=p)
            spec = ElasticNetSpec(alpha=0.4, l1_ratio=0.0)  # smooth part only
            analytic = -X.T @ (y - X @ w) / n + spec.alpha * w

            def smooth(wv):
                r = y - X @ wv
                return float(r @ r) / (2 * n) + spec.alpha / 2 * float(wv @ wv)

            for j in range(p):
                step = np.zeros(p)
                step[j] = 1e-6
                numeric = (smooth(w + step) - smooth(w - step)) / 2e-6
                assert abs(numeric - analytic[j]) <= 1e-4 * max(1.0, abs(analytic[j]))

    def test_internal_standardization_maps_back(self):
        rng = np.random.default_rng(14)
        X = rng.normal(loc=5.0, scale=3.0, size=(40, 3))
        y = X @ np.array([1.0, -2.0, 0.5]) + 4.0
        fit = fit_elastic_net(X, y, ElasticNetSpec(alpha=0.0, tol=1e-12), standardize=True)
        np.testing.assert_allclose(fit.weights, [1.0, -2.0, 0.5], atol=1e-6)
        assert fit.intercept == pytest.approx(4.0, abs=1e-6)

    def test_rejects_bad_inputs(self):
        with pytest.raises(DataError):
            fit_elastic_net(np.array([[np.nan]]), np.array([1.0]))
        with pytest.raises(DataError):
            fit_elastic_net(np.empty((3, 0)), np.zeros(3))
        with pytest.raises(DataError):
            ElasticNetSpec(l1_ratio=1.5)


class TestL1Logistic:
    def test_separable_direction(self):
        rng = np.random.default_rng(20)
        x = np.concatenate([rng.normal(-3.0, 0.3, 30), rng.normal(3.0, 0.3, 30)])
        y = np.concatenate([np.zeros(30), np.ones(30)])
        fit = fit_l1_logistic(x[:, None], y, c=1000.0)
        assert fit.weights[0] > 0
        margin = fit.weights[0] * 3.0 + fit.intercept
        assert 1.0 / (1.0 + np.exp(-margin)) > 0.9

    def test_total_shrinkage_gives_base_rate(self):
        rng = np.random.default_rng(21)
        X = rng.normal(size=(50, 3))
        y = (rng.random(50) < 0.7).astype(float)
        fit = fit_l1_logistic(X, y, c=1e-6)
        np.testing.assert_array_equal(fit.weights, np.zeros(3))
        base = float(np.mean(y))
        assert 1.0 / (1.0 + np.exp(-fit.intercept)) == pytest.approx(base, abs=1e-6)

    def test_noise_weight_exactly_zero_below_bisection_threshold(self):
        # Find (by bisection) the largest c at which the noise coordinate is
        # still exactly zero, then check a strictly smaller c keeps it zero
        # and a much larger c activates it.
        rng = np.random.default_rng(22)
        x = rng.normal(size=120)
        noise = rng.normal(size=120)
        y = (1.0 / (1.0 + np.exp(-2.0 * x)) > rng.random(120)).astype(float)
        X = np.column_stack([x, noise])

        def noise_weight(c):
            return fit_l1_logistic(X, y, c=c).weights[1]

        lo, hi = 1.0, 4000.0
        assert noise_weight(lo) == 0.0
        assert noise_weight(hi) != 0.0
        for _ in range(20):
            mid = np.sqrt(lo * hi)
            if noise_weight(mid) == 0.0:
                lo = mid
            else:
                hi = mid
        assert noise_weight(lo * 0.5) == 0.0
        assert noise_weight(hi * 2.0) != 0.0

    def test_objective_trace_monotone(self):
        rng = np.random.default_rng(23)
        X = rng.normal(size=(60, 5))
        logits = X @ np.array([1.0, -1.0, 0.0, 0.5, 0.0])
        y = (1.0 / (1.0 + np.exp(-logits)) > rng.random(60)).astype(float)
        fit = fit_l1_logistic(X, y, c=20.0)
        trace = np.array(fit.objective_trace)
        assert np.all(np.diff(trace) <= 1e-12)

    def test_single_class_rejected(self):
        with pytest.raises(TrainingError, match="both classes"):
            fit_l1_logistic(np.ones((5, 1)), np.ones(5))

    def test_loss_helper_is_stable_for_large_margins(self):
        X = np.array([[1000.0], [-1000.0]])
        y = np.array([1.0, 0.0])
        value = logistic_loss(X, y, np.array([1.0]), 0.0)
        assert np.isfinite(value)
        assert value == pytest.approx(0.0, abs=1e-12)
