"""Forecast error metrics shared by labeling and backtesting."""

from __future__ import annotations

import numpy as np

from .errors import DataError

METRICS = ("MSE", "MAE", "MAPE")


class MapeUndefinedError(DataError):
    """An actual value is too close to zero for a percentage error."""

    def __init__(self, index: int, value: float) -> None:
        super().__init__(f"MAPE undefined: |actual[{index}]| = {abs(value):.3g} is below the epsilon guard")
        self.index = index
        self.value = value


def _paired(actual: np.ndarray, predicted: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    actual = np.asarray(actual, dtype=np.float64)
    predicted = np.asarray(predicted, dtype=np.float64)
    if actual.shape != predicted.shape or actual.ndim != 1 or actual.size == 0:
        raise DataError("actual and predicted must be equal-length non-empty vectors")
    return actual, predicted


def mse(actual: np.ndarray, predicted: np.ndarray) -> float:
    actual, predicted = _paired(actual, predicted)
    return float(np.mean((actual - predicted) ** 2))


def mae(actual: np.ndarray, predicted: np.ndarray) -> float:
    actual, predicted = _paired(actual, predicted)
    return float(np.mean(np.abs(actual - predicted)))


def mape(actual: np.ndarray, predicted: np.ndarray, epsilon: float = 1e-8) -> float:
    """Mean absolute percentage error, in percent.

    Raises :class:`MapeUndefinedError` (with the offending index) when any
    actual value sits inside the epsilon guard, so callers can mark the
    fold invalid instead of propagating an infinity.
    """
    actual, predicted = _paired(actual, predicted)
    small = np.abs(actual) <= epsilon
    if small.any():
        index = int(np.argmax(small))
        raise MapeUndefinedError(index, float(actual[index]))
    return float(np.mean(np.abs((actual - predicted) / actual))) * 100.0


def score(metric: str, actual: np.ndarray, predicted: np.ndarray) -> float:
    if metric == "MSE":
        return mse(actual, predicted)
    if metric == "MAE":
        return mae(actual, predicted)
    if metric == "MAPE":
        return mape(actual, predicted)
    raise DataError(f"unknown metric {metric!r}; expected one of {list(METRICS)}")
