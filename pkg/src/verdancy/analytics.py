"""Summary statistics, graph downsampling, and the per-location report.

Everything here is pure over immutable series snapshots.  Downsampling
uses aligned fixed-width buckets carrying mean/min/max so that the
weighted recombination of bucket means reproduces the overall mean.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .ingest import DEFAULT_SAMPLING_INTERVAL_S, VARIABLE_FIELDS, SensorReading


@dataclass(frozen=True)
class VariableStats:
    count: int
    mean: float | None
    min: float | None
    max: float | None
    coverage_fraction: float | None = None  # only for window summaries


@dataclass(frozen=True)
class SummaryStats:
    temperature: VariableStats
    humidity: VariableStats
    illuminance: VariableStats

    def for_variable(self, variable: str) -> VariableStats:
        return getattr(self, variable)


@dataclass(frozen=True)
class Bucket:
    bucket_start: int
    sample_count: int
    temperature: VariableStats
    humidity: VariableStats
    illuminance: VariableStats


@dataclass(frozen=True)
class LocationRow:
    label: str
    stats: SummaryStats


@dataclass(frozen=True)
class LocationReport:
    rows: list[LocationRow]
    illuminance_ratio: float | None  # brightest/dimmest location, when >= 2


def _stats(values: list[float], coverage: float | None = None) -> VariableStats:
    if not values:
        return VariableStats(0, None, None, None, coverage)
    return VariableStats(
        count=len(values),
        mean=math.fsum(values) / len(values),
        min=min(values),
        max=max(values),
        coverage_fraction=coverage,
    )


def summarize(
    series: list[SensorReading],
    from_ms: int,
    to_ms: int,
    interval_s: float = DEFAULT_SAMPLING_INTERVAL_S,
) -> SummaryStats:
    """Per-variable count/mean/min/max over [from, to), plus the
    coverage fraction against the nominal sampling interval."""
    if from_ms > to_ms:
        raise ValueError("summary range is inverted")
    window = [r for r in series if from_ms <= r.timestamp < to_ms]
    expected = max(1, int((to_ms - from_ms) / (interval_s * 1000)))
    per_variable = {}
    for variable, attr in VARIABLE_FIELDS.items():
        values = [getattr(r, attr) for r in window if getattr(r, attr) is not None]
        coverage = min(1.0, len(values) / expected)
        per_variable[variable] = _stats(values, coverage)
    return SummaryStats(**per_variable)


def downsample(series: list[SensorReading], bucket_width_ms: int) -> list[Bucket]:
    """Aligned fixed-width buckets with per-variable stats; buckets with
    no samples are omitted."""
    if bucket_width_ms <= 0:
        raise ValueError("bucket width must be > 0")
    groups: dict[int, list[SensorReading]] = {}
    for r in series:
        start = (r.timestamp // bucket_width_ms) * bucket_width_ms
        groups.setdefault(start, []).append(r)
    buckets = []
    for start in sorted(groups):
        rows = groups[start]
        per_variable = {
            variable: _stats(
                [getattr(r, attr) for r in rows if getattr(r, attr) is not None]
            )
            for variable, attr in VARIABLE_FIELDS.items()
        }
        buckets.append(Bucket(bucket_start=start, sample_count=len(rows), **per_variable))
    return buckets


def location_report(
    series_by_label: dict[str, list[SensorReading]],
    from_ms: int | None = None,
    to_ms: int | None = None,
    interval_s: float = DEFAULT_SAMPLING_INTERVAL_S,
) -> LocationReport:
    """One row per location (lexicographic), with the illuminance ratio
    between the brightest and dimmest locations when comparable."""
    if not series_by_label:
        raise ValueError("at least one location required")
    if from_ms is None:
        from_ms = min(
            (s[0].timestamp for s in series_by_label.values() if s), default=0
        )
    if to_ms is None:
        to_ms = max(
            (s[-1].timestamp + 1 for s in series_by_label.values() if s),
            default=from_ms,
        )
    rows = [
        LocationRow(label, summarize(series_by_label[label], from_ms, to_ms, interval_s))
        for label in sorted(series_by_label)
    ]
    lux_means = [
        row.stats.illuminance.mean
        for row in rows
        if row.stats.illuminance.mean is not None
    ]
    ratio = None
    if len(lux_means) >= 2 and min(lux_means) > 0:
        ratio = max(lux_means) / min(lux_means)
    return LocationReport(rows=rows, illuminance_ratio=ratio)
