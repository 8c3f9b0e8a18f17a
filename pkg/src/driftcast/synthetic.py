"""Seeded regime-switching benchmark generator.

Produces a series that cycles through three regimes (sinusoidal
seasonality, linear trend, noise burst) with a categorical regime-hint
covariate, plus the segment metadata needed to check which predictor
should dominate where.  Levels stay well away from zero so percentage
errors are defined everywhere.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .series import CATEGORICAL, Covariate, TimeSeries

REGIMES = ("seasonal", "trend", "burst")


@dataclass(frozen=True)
class Segment:
    kind: str
    start: int
    stop: int

    def to_dict(self) -> dict:
        return {"kind": self.kind, "start": self.start, "stop": self.stop}


def make_regime_series(
    seed: int = 0,
    cycles: int = 3,
    segment_length: int = 100,
    season_length: int = 7,
    base_level: float = 50.0,
    amplitude: float = 8.0,
    pattern_walk: float = 1.2,
    seasonal_noise: float = 0.3,
    trend_slope: float = 0.18,
    trend_noise: float = 0.35,
    burst_noise: float = 3.5,
    spike_rate: float = 0.06,
    start: str = "2021-01-01",
) -> tuple[TimeSeries, tuple[Segment, ...]]:
    """Generate ``cycles`` repetitions of seasonal -> trend -> burst segments.

    Seasonal segments repeat a zero-mean pattern that random-walks a little
    every season (so the most recent season stays the best template);
    trend segments move the level linearly; burst segments hold the level
    under heavy noise with occasional spikes.
    """
    rng = np.random.default_rng(seed)
    total = cycles * len(REGIMES) * segment_length
    values = np.empty(total)
    hints: list[str] = []
    segments: list[Segment] = []
    level = base_level
    position = 0
    for cycle in range(cycles):
        for kind in REGIMES:
            stop = position + segment_length
            segments.append(Segment(kind=kind, start=position, stop=stop))
            t = np.arange(segment_length)
            if kind == "seasonal":
                pattern = rng.normal(0.0, 1.0, season_length)
                pattern -= pattern.mean()
                pattern *= amplitude / max(1e-9, np.abs(pattern).max())
                chunk = np.empty(segment_length)
                for i in range(segment_length):
                    if i > 0 and i % season_length == 0:
                        pattern = pattern + rng.normal(0.0, pattern_walk, season_length)
                        pattern -= pattern.mean()
                    chunk[i] = level + pattern[i % season_length] + rng.normal(0.0, seasonal_noise)
            elif kind == "trend":
                # Alternating slope keeps the level oscillating between two
                # recurring values, so concepts repeat across cycles.
                slope = trend_slope if cycle % 2 == 0 else -trend_slope
                chunk = level + slope * (t + 1)
                chunk += rng.normal(0.0, trend_noise, segment_length)
                level = level + slope * segment_length
            else:
                chunk = level + rng.normal(0.0, burst_noise, segment_length)
                spikes = rng.random(segment_length) < spike_rate
                chunk[spikes] += rng.normal(10.0, 3.0, int(spikes.sum()))
            values[position:stop] = chunk
            hints.extend([kind] * segment_length)
            position = stop

    timestamps = np.datetime64(start, "s") + np.arange(total) * np.timedelta64(1, "D").astype("timedelta64[s]")
    hint = Covariate("regime_hint", CATEGORICAL, np.asarray(hints, dtype=object))
    return TimeSeries(timestamps, values, (hint,)), tuple(segments)


def write_segments(segments: tuple[Segment, ...], path: str | Path) -> None:
    payload = [segment.to_dict() for segment in segments]
    Path(path).write_text(json.dumps(payload, indent=2) + "\n", encoding="utf-8")


def load_segments(path: str | Path) -> tuple[Segment, ...]:
    payload = json.loads(Path(path).read_text(encoding="utf-8"))
    return tuple(Segment(kind=e["kind"], start=e["start"], stop=e["stop"]) for e in payload)
