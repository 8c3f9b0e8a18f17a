"""Concept-drift detection over a value stream plus the retrain-interval guard.

The primary detector is a sliding-window two-sample Kolmogorov-Smirnov
test: the newest ``sample_size`` values are compared against an equally
sized subsample of the older window region, firing when the empirical-CDF
sup distance exceeds the two-sample significance bound.  An
adaptive-windowing mean-change detector is available as an alternate
behind the same update contract.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Any

import numpy as np

from .errors import DataError


@dataclass(frozen=True)
class DriftEvent:
    """One detector firing: stream position (1-based), statistic, threshold."""

    position: int
    statistic: float
    threshold: float


def ks_statistic(a: np.ndarray, b: np.ndarray) -> float:
    """Exact sup distance between the empirical CDFs of two samples.

    Both CDFs are evaluated at every sample point of either sample (the sup
    over the whole line is attained there), using right-continuous
    empirical CDFs over the sorted samples.
    """
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.size == 0 or b.size == 0:
        raise DataError("ks_statistic requires non-empty samples")
    a_sorted = np.sort(a)
    b_sorted = np.sort(b)
    points = np.concatenate([a_sorted, b_sorted])
    cdf_a = np.searchsorted(a_sorted, points, side="right") / a.size
    cdf_b = np.searchsorted(b_sorted, points, side="right") / b.size
    return float(np.max(np.abs(cdf_a - cdf_b)))


class KswinDetector:
    """KS-windowing drift detector with seeded reference subsampling.

    Keeps a ring buffer of the last ``window_size`` values.  Once full,
    every update compares the newest ``sample_size`` values against
    ``sample_size`` values drawn uniformly without replacement from the
    older region, and fires when the KS statistic exceeds
    ``sqrt(-ln(alpha)/r) * sqrt(2)``.  On firing, the buffer resets to the
    newest ``sample_size`` values.
    """

    def __init__(
        self,
        window_size: int = 100,
        sample_size: int = 30,
        alpha: float = 0.005,
        seed: int = 0,
    ) -> None:
        if not (2 <= sample_size <= window_size / 2):
            raise DataError("sample_size must satisfy 2 <= r <= window_size / 2")
        if not (0.0 < alpha < 1.0):
            raise DataError("alpha must be in (0, 1)")
        self.window_size = window_size
        self.sample_size = sample_size
        self.alpha = alpha
        self.threshold = math.sqrt(-math.log(alpha) / sample_size) * math.sqrt(2.0)
        self._rng = np.random.default_rng(seed)
        self._window: list[float] = []
        self._position = 0

    def update(self, value: float) -> DriftEvent | None:
        if not np.isfinite(value):
            raise DataError("detector input must be finite")
        self._position += 1
        self._window.append(float(value))
        if len(self._window) > self.window_size:
            self._window.pop(0)
        if len(self._window) < self.window_size:
            return None
        recent = np.asarray(self._window[-self.sample_size :])
        older = np.asarray(self._window[: -self.sample_size])
        reference = self._rng.choice(older, size=self.sample_size, replace=False)
        statistic = ks_statistic(recent, reference)
        if statistic > self.threshold:
            self._window = self._window[-self.sample_size :]
            return DriftEvent(position=self._position, statistic=statistic, threshold=self.threshold)
        return None


class AdwinDetector:
    """Adaptive-windowing mean-change detector (exponential-histogram form).

    Buckets of exponentially growing size summarize the window; each update
    scans adjacent sub-window splits at bucket boundaries and cuts the
    older part when the means differ beyond a Bernstein-style bound at
    confidence ``delta``.
    """

    _MAX_BUCKETS_PER_ROW = 5
    _MIN_SUBWINDOW = 5

    def __init__(self, delta: float = 0.002) -> None:
        if not (0.0 < delta < 1.0):
            raise DataError("delta must be in (0, 1)")
        self.delta = delta
        # Each bucket is (count, total, total_sq); rows hold equal counts.
        self._rows: list[list[tuple[int, float, float]]] = [[]]
        self._position = 0

    def _iter_buckets_oldest_first(self):
        for row in reversed(self._rows):
            yield from row

    def _totals(self) -> tuple[int, float, float]:
        count, total, total_sq = 0, 0.0, 0.0
        for c, t, s in self._iter_buckets_oldest_first():
            count += c
            total += t
            total_sq += s
        return count, total, total_sq

    def _compress(self) -> None:
        row_index = 0
        while row_index < len(self._rows):
            row = self._rows[row_index]
            if len(row) <= self._MAX_BUCKETS_PER_ROW:
                break
            first = row.pop(0)
            second = row.pop(0)
            merged = (first[0] + second[0], first[1] + second[1], first[2] + second[2])
            if row_index + 1 == len(self._rows):
                self._rows.append([])
            self._rows[row_index + 1].append(merged)
            row_index += 1

    def _drop_oldest_bucket(self) -> None:
        for row in reversed(self._rows):
            if row:
                row.pop(0)
                return

    def update(self, value: float) -> DriftEvent | None:
        if not np.isfinite(value):
            raise DataError("detector input must be finite")
        self._position += 1
        self._rows[0].append((1, float(value), float(value) ** 2))
        self._compress()

        count, total, total_sq = self._totals()
        if count < 2 * self._MIN_SUBWINDOW:
            return None
        mean = total / count
        variance = max(total_sq / count - mean * mean, 0.0)
        delta_prime = self.delta / count

        event: DriftEvent | None = None
        while True:
            buckets = list(self._iter_buckets_oldest_first())
            n0, s0 = 0, 0.0
            count, total, _ = self._totals()
            cut = False
            for bucket in buckets[:-1]:
                n0 += bucket[0]
                s0 += bucket[1]
                n1 = count - n0
                if n0 < self._MIN_SUBWINDOW or n1 < self._MIN_SUBWINDOW:
                    continue
                harmonic = 1.0 / (1.0 / n0 + 1.0 / n1)
                epsilon = math.sqrt((2.0 / harmonic) * variance * math.log(2.0 / delta_prime)) + (
                    2.0 / (3.0 * harmonic)
                ) * math.log(2.0 / delta_prime)
                gap = abs(s0 / n0 - (total - s0) / n1)
                if gap > epsilon:
                    event = DriftEvent(position=self._position, statistic=gap, threshold=epsilon)
                    self._drop_oldest_bucket()
                    cut = True
                    break
            if not cut:
                break
        return event


class RetrainGuard:
    """Minimum-interval gate between retrains.

    Works with any ordered timestamp type whose differences compare against
    ``min_interval`` (day numbers, numpy datetimes, ...).
    """

    def __init__(self, min_interval: Any, last_retrain: Any | None = None) -> None:
        if isinstance(min_interval, (int, float)) and min_interval < 0:
            raise DataError("min_interval must be >= 0")
        self.min_interval = min_interval
        self.last_retrain = last_retrain

    def allows(self, now: Any) -> bool:
        if self.last_retrain is None:
            return True
        if now < self.last_retrain:
            raise DataError("guard queried with a timestamp earlier than the last retrain")
        return now - self.last_retrain >= self.min_interval

    def record(self, now: Any) -> None:
        self.last_retrain = now
