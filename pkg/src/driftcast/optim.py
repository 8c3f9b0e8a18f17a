"""Sparse-regularized linear solvers used for feature selection and the rule classifier.

``fit_elastic_net`` minimizes

    L(w) = (1/2n) ||y - Xw||^2 + alpha * l1_ratio * ||w||_1
         + (alpha * (1 - l1_ratio) / 2) * ||w||^2

by cyclic coordinate descent with a fixed coordinate order.  The (1/2n)
data-term scaling is part of the contract: penalty strengths are only
meaningful under this exact parameterization.  The intercept is unpenalized
and handled by centering.

``fit_l1_logistic`` minimizes mean logistic loss plus (1/c)*||w||_1 by
iteratively reweighted least squares with the same coordinate-descent inner
solver, backtracking to keep the penalized objective non-increasing.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DataError, TrainingError


@dataclass(frozen=True)
class ElasticNetSpec:
    alpha: float = 0.9
    l1_ratio: float = 0.7
    max_iters: int = 10_000
    tol: float = 1e-6

    def __post_init__(self) -> None:
        if self.alpha < 0:
            raise DataError("alpha must be >= 0")
        if not (0.0 <= self.l1_ratio <= 1.0):
            raise DataError("l1_ratio must be in [0, 1]")
        if self.tol <= 0 or self.max_iters < 1:
            raise DataError("tol must be > 0 and max_iters >= 1")


@dataclass(frozen=True)
class LinearFit:
    """Result of a sparse linear fit.

    ``objective_trace`` holds the penalized objective after each outer
    iteration and is non-increasing.
    """

    weights: np.ndarray
    intercept: float
    iterations_used: int
    final_objective: float
    objective_trace: tuple[float, ...]


def _soft_threshold(value: float, threshold: float) -> float:
    if value > threshold:
        return value - threshold
    if value < -threshold:
        return value + threshold
    return 0.0


def elastic_net_objective(X: np.ndarray, y: np.ndarray, weights: np.ndarray, intercept: float, spec: ElasticNetSpec) -> float:
    n = X.shape[0]
    residual = y - X @ weights - intercept
    return (
        float(residual @ residual) / (2 * n)
        + spec.alpha * spec.l1_ratio * float(np.sum(np.abs(weights)))
        + spec.alpha * (1 - spec.l1_ratio) / 2 * float(weights @ weights)
    )


def _check_design(X: np.ndarray, y: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if X.ndim != 2:
        raise DataError("X must be a 2-D matrix")
    if X.shape[1] == 0:
        raise DataError("X must have at least one column")
    if y.shape != (X.shape[0],):
        raise DataError("y length does not match X rows")
    if not (np.all(np.isfinite(X)) and np.all(np.isfinite(y))):
        raise DataError("non-finite value in the design matrix or targets")
    return X, y


def fit_elastic_net(
    X: np.ndarray,
    y: np.ndarray,
    spec: ElasticNetSpec = ElasticNetSpec(),
    *,
    standardize: bool = False,
) -> LinearFit:
    """Cyclic coordinate descent on the elastic-net objective.

    The caller either passes columns that are already standardized or sets
    ``standardize=True`` to scale internally; coefficients are always
    reported on the input scale.  Columns are centered in both cases so the
    intercept stays unpenalized.
    """
    X, y = _check_design(X, y)
    n, p = X.shape
    if n < 2:
        raise DataError("need at least 2 samples")

    col_means = X.mean(axis=0)
    Xc = X - col_means
    if standardize:
        scales = Xc.std(axis=0)
        scales[scales == 0.0] = 1.0
        Xc = Xc / scales
    else:
        scales = np.ones(p)
    y_mean = float(np.mean(y))
    yc = y - y_mean

    l1 = spec.alpha * spec.l1_ratio
    l2 = spec.alpha * (1 - spec.l1_ratio)
    col_sq = (Xc * Xc).sum(axis=0) / n

    weights = np.zeros(p)
    residual = yc.copy()
    trace: list[float] = []
    iterations = 0
    for iteration in range(spec.max_iters):
        iterations = iteration + 1
        max_delta = 0.0
        for j in range(p):
            if col_sq[j] == 0.0:
                continue
            rho = float(Xc[:, j] @ residual) / n + col_sq[j] * weights[j]
            new = _soft_threshold(rho, l1) / (col_sq[j] + l2)
            delta = new - weights[j]
            if delta != 0.0:
                residual -= Xc[:, j] * delta
                weights[j] = new
                max_delta = max(max_delta, abs(delta))
        trace.append(
            float(residual @ residual) / (2 * n)
            + l1 * float(np.sum(np.abs(weights)))
            + l2 / 2 * float(weights @ weights)
        )
        if max_delta < spec.tol:
            break

    weights_out = weights / scales
    intercept = y_mean - float(col_means @ weights_out)
    return LinearFit(
        weights=weights_out,
        intercept=intercept,
        iterations_used=iterations,
        final_objective=trace[-1],
        objective_trace=tuple(trace),
    )


def _sigmoid(margins: np.ndarray) -> np.ndarray:
    out = np.empty_like(margins)
    pos = margins >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-margins[pos]))
    exp_m = np.exp(margins[~pos])
    out[~pos] = exp_m / (1.0 + exp_m)
    return out


def logistic_loss(X: np.ndarray, y: np.ndarray, weights: np.ndarray, intercept: float) -> float:
    margins = X @ weights + intercept
    signed = np.where(y > 0.5, -margins, margins)
    return float(np.mean(np.logaddexp(0.0, signed)))


def _l1_logistic_objective(X, y, weights, intercept, penalty) -> float:
    return logistic_loss(X, y, weights, intercept) + penalty * float(np.sum(np.abs(weights)))


def fit_l1_logistic(
    X: np.ndarray,
    y: np.ndarray,
    c: float = 1.0,
    max_iters: int = 100,
    tol: float = 1e-6,
) -> LinearFit:
    """L1-regularized logistic regression by IRLS + coordinate descent.

    ``c`` is the inverse regularization strength; the penalty weight is
    1/c.  Each outer iteration solves the local quadratic approximation by
    coordinate descent and backtracks toward the previous iterate until the
    penalized objective does not increase.
    """
    X, y = _check_design(X, y)
    y = (y > 0.5).astype(np.float64)
    if np.unique(y).size < 2:
        raise TrainingError("logistic fit requires both classes present")
    if c <= 0:
        raise DataError("c must be > 0")
    n, p = X.shape
    penalty = 1.0 / c

    base_rate = float(np.mean(y))
    weights = np.zeros(p)
    intercept = float(np.log(base_rate / (1.0 - base_rate)))
    objective = _l1_logistic_objective(X, y, weights, intercept, penalty)
    trace = [objective]

    iterations = 0
    for iteration in range(max_iters):
        iterations = iteration + 1
        margins = X @ weights + intercept
        prob = _sigmoid(margins)
        curvature = np.clip(prob * (1.0 - prob), 1e-5, None)
        working = margins + (y - prob) / curvature

        new_w = weights.copy()
        new_b = intercept
        col_sq = (curvature[:, None] * X * X).sum(axis=0) / n
        residual = curvature * (working - X @ new_w - new_b)
        mean_curv = float(np.mean(curvature))

        # Active-set coordinate descent: cycle only over coordinates that
        # are nonzero or violate the KKT screen, re-screening with one full
        # vectorized gradient until no violators remain.
        active = set(np.nonzero(new_w)[0].tolist())
        for _ in range(100):
            gradient = X.T @ residual / n
            violators = np.nonzero(np.abs(gradient) > penalty + 1e-12)[0]
            active.update(int(j) for j in violators)
            order = sorted(active)
            if not order:
                shift = float(np.mean(residual)) / mean_curv
                if abs(shift) > tol:
                    new_b += shift
                    residual -= curvature * shift
                    continue
                break
            for _ in range(1000):
                max_delta = 0.0
                for j in order:
                    if col_sq[j] == 0.0:
                        continue
                    rho = float(X[:, j] @ residual) / n + col_sq[j] * new_w[j]
                    updated = _soft_threshold(rho, penalty) / col_sq[j]
                    delta = updated - new_w[j]
                    if delta != 0.0:
                        residual -= curvature * X[:, j] * delta
                        new_w[j] = updated
                        max_delta = max(max_delta, abs(delta))
                shift = float(np.mean(residual)) / mean_curv
                if shift != 0.0:
                    new_b += shift
                    residual -= curvature * shift
                    max_delta = max(max_delta, abs(shift))
                if max_delta < tol:
                    break
            gradient = X.T @ residual / n
            outside = np.abs(gradient) > penalty + 1e-12
            outside[order] = False
            if not outside.any():
                break
            active.update(int(j) for j in np.nonzero(outside)[0])

        # Newton steps on the approximation can overshoot the true
        # objective; halve back toward the previous iterate if needed.
        step_w = new_w - weights
        step_b = new_b - intercept
        scale = 1.0
        candidate = _l1_logistic_objective(X, y, new_w, new_b, penalty)
        while candidate > objective + 1e-12 and scale > 1e-8:
            scale /= 2.0
            candidate = _l1_logistic_objective(X, y, weights + scale * step_w, intercept + scale * step_b, penalty)
        if scale < 1.0:
            new_w = weights + scale * step_w
            new_b = intercept + scale * step_b

        max_change = max(float(np.max(np.abs(new_w - weights))) if p else 0.0, abs(new_b - intercept))
        weights, intercept, objective = new_w, new_b, candidate
        trace.append(objective)
        if max_change < tol:
            break

    return LinearFit(
        weights=weights,
        intercept=intercept,
        iterations_used=iterations,
        final_objective=objective,
        objective_trace=tuple(trace),
    )
