"""KS statistic, windowed KS detector, adaptive-window detector, retrain guard."""

import numpy as np
import pytest

from driftcast.drift import AdwinDetector, KswinDetector, RetrainGuard, ks_statistic
from driftcast.errors import DataError


def brute_force_ks(a, b):
    """Sup over all sample points of |F_a(u) - F_b(u)| with right-continuous CDFs."""
    best = 0.0
    for u in list(a) + list(b):
        fa = sum(1 for v in a if v <= u) / len(a)
        fb = sum(1 for v in b if v <= u) / len(b)
        best = max(best, abs(fa - fb))
    return best


class TestKsStatistic:
    def test_identical_samples(self):
        assert ks_statistic(np.array([1.0, 2.0, 3.0]), np.array([1.0, 2.0, 3.0])) == 0.0

    def test_disjoint_supports(self):
        assert ks_statistic(np.zeros(3), np.ones(3)) == 1.0

    def test_half_overlap(self):
        assert ks_statistic(np.array([1.0, 2.0]), np.array([2.0, 3.0])) == 0.5

    def test_matches_brute_force_on_random_pairs(self):
        rng = np.random.default_rng(0)
        for _ in range(300):
            na, nb = rng.integers(1, 50, size=2)
            if rng.random() < 0.5:
                a = rng.normal(size=na)
                b = rng.normal(loc=rng.uniform(-1, 1), size=nb)
            else:
                a = rng.integers(0, 5, size=na).astype(float)
                b = rng.integers(0, 5, size=nb).astype(float)
            assert ks_statistic(a, b) == pytest.approx(brute_force_ks(a, b), abs=1e-12)

    def test_symmetry_and_bounds(self):
        rng = np.random.default_rng(1)
        for _ in range(50):
            a = rng.normal(size=rng.integers(1, 30))
            b = rng.normal(size=rng.integers(1, 30))
            d = ks_statistic(a, b)
            assert d == ks_statistic(b, a)
            assert 0.0 <= d <= 1.0
        assert ks_statistic(a, a) == 0.0

    def test_empty_sample_rejected(self):
        with pytest.raises(DataError):
            ks_statistic(np.array([]), np.array([1.0]))


class TestKswinDetector:
    def test_never_fires_before_window_fills(self):
        detector = KswinDetector(window_size=20, sample_size=5, alpha=0.005, seed=0)
        for i in range(19):
            assert detector.update(1000.0 if i % 2 else -1000.0) is None

    def test_constant_stream_never_fires(self):
        detector = KswinDetector(window_size=50, sample_size=10, seed=0)
        for _ in range(500):
            assert detector.update(3.0) is None

    def test_fires_quickly_after_mean_shift(self):
        fired_within = 0
        runs = 100
        for seed in range(runs):
            rng = np.random.default_rng(seed)
            detector = KswinDetector(window_size=100, sample_size=30, alpha=0.005, seed=seed)
            for value in rng.normal(0.0, 1.0, 150):
                detector.update(float(value))
            delay = None
            for i, value in enumerate(rng.normal(5.0, 1.0, 60), start=1):
                if detector.update(float(value)) is not None:
                    delay = i
                    break
            if delay is not None and delay <= 60:
                fired_within += 1
        assert fired_within >= 90

    def test_null_false_alarm_rate(self):
        # Shorter null streams here; the acceptance suite runs the full
        # 10 000-point version.
        fires = 0
        tests = 0
        for seed in range(30):
            rng = np.random.default_rng(seed)
            detector = KswinDetector(window_size=100, sample_size=30, alpha=0.005, seed=seed)
            for value in rng.normal(size=2000):
                if detector.update(float(value)) is not None:
                    fires += 1
            tests += 2000 - 99
        assert fires / tests <= 5 * 0.005

    def test_buffer_resets_to_recent_after_fire(self):
        rng = np.random.default_rng(3)
        detector = KswinDetector(window_size=40, sample_size=10, alpha=0.01, seed=3)
        for value in rng.normal(0, 1, 60):
            detector.update(float(value))
        event = None
        for value in rng.normal(9, 1, 40):
            event = detector.update(float(value))
            if event is not None:
                break
        assert event is not None
        assert len(detector._window) == 10

    def test_parameter_validation(self):
        with pytest.raises(DataError):
            KswinDetector(window_size=10, sample_size=6)
        with pytest.raises(DataError):
            KswinDetector(alpha=1.5)
        detector = KswinDetector()
        with pytest.raises(DataError):
            detector.update(float("nan"))

    def test_threshold_formula(self):
        detector = KswinDetector(window_size=100, sample_size=30, alpha=0.005)
        expected = np.sqrt(-np.log(0.005) / 30) * np.sqrt(2)
        assert detector.threshold == pytest.approx(expected)


class TestAdwinDetector:
    def test_constant_stream_never_fires(self):
        detector = AdwinDetector(delta=0.002)
        for _ in range(1000):
            assert detector.update(2.5) is None

    def test_fires_on_level_switch(self):
        for seed in range(50):
            rng = np.random.default_rng(seed)
            detector = AdwinDetector(delta=0.002)
            for value in rng.normal(0.0, 0.05, 150):
                detector.update(float(value))
            delay = None
            for i, value in enumerate(rng.normal(1.0, 0.05, 200), start=1):
                if detector.update(float(value)) is not None:
                    delay = i
                    break
            assert delay is not None and delay <= 200, f"seed {seed} missed the switch"

    def test_detection_delay_monotone_in_delta(self):
        # A more permissive delta (easier cut) must not detect later, in
        # median over seeded runs.
        def median_delay(delta):
            delays = []
            for seed in range(50):
                rng = np.random.default_rng(seed)
                detector = AdwinDetector(delta=delta)
                for value in rng.normal(0.0, 0.3, 120):
                    detector.update(float(value))
                delay = 250
                for i, value in enumerate(rng.normal(1.0, 0.3, 250), start=1):
                    if detector.update(float(value)) is not None:
                        delay = i
                        break
                delays.append(delay)
            return float(np.median(delays))

        d_loose = median_delay(0.05)
        d_mid = median_delay(0.002)
        d_tight = median_delay(1e-5)
        assert d_loose <= d_mid <= d_tight

    def test_delta_validation(self):
        with pytest.raises(DataError):
            AdwinDetector(delta=0.0)


class TestRetrainGuard:
    def test_paper_worked_example(self):
        guard = RetrainGuard(min_interval=14)
        retrained = []
        for day in (1, 7, 20):
            if guard.allows(day):
                guard.record(day)
                retrained.append(day)
        assert retrained == [1, 20]

    def test_zero_interval_always_allows(self):
        guard = RetrainGuard(min_interval=0)
        for day in (1, 1, 2, 2):
            assert guard.allows(day)
            guard.record(day)

    def test_boundary_is_inclusive(self):
        guard = RetrainGuard(min_interval=14, last_retrain=10)
        assert guard.allows(24)
        assert not guard.allows(23)

    def test_monotone_blocking_inside_interval(self):
        guard = RetrainGuard(min_interval=10, last_retrain=100)
        for t in range(100, 110):
            assert not guard.allows(t)
        assert guard.allows(110)

    def test_rejects_time_travel(self):
        guard = RetrainGuard(min_interval=5, last_retrain=50)
        with pytest.raises(DataError):
            guard.allows(49)

    def test_works_with_numpy_datetimes(self):
        guard = RetrainGuard(min_interval=np.timedelta64(14, "D"))
        day = np.datetime64("2023-01-01")
        assert guard.allows(day)
        guard.record(day)
        assert not guard.allows(np.datetime64("2023-01-08"))
        assert guard.allows(np.datetime64("2023-01-15"))

    def test_negative_interval_rejected(self):
        with pytest.raises(DataError):
            RetrainGuard(min_interval=-1)
