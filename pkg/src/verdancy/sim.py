"""Seeded synthetic winter indoor climate streams.

Per location: temperature is a slow AR(1) around its mean with
Poisson-arriving rectangular draft dips, humidity is a random walk
reflected inside a fixed band, and illuminance follows a half-sine
diurnal curve with bounded multiplicative cloud noise.  Statistically
realistic enough to drive the pipeline; no physical heat-transfer model.

Randomness comes from numpy's Philox counter-based generator, keyed per
location as seed XOR blake2b64(label), so output is reproducible across
runs and platforms.  Draw order per location is fixed: temperature
innovations, humidity steps, cloud factors, draft count, draft starts.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass
from hashlib import blake2b
from pathlib import Path

import numpy as np
from scipy.signal import lfilter

from .ingest import SensorReading
from .storage import CSV_HEADER, format_values_row
from .timeutil import format_timestamp_ms, parse_timestamp_ms

# AR(1) coefficient at the 5 s reference step; rescaled for other intervals
TEMP_AR1_COEFF_AT_5S = 0.99
REFERENCE_INTERVAL_S = 5.0
# humidity random-walk step, as a fraction of the band, per 5 s step
HUMIDITY_STEP_FRACTION = 1.0 / 32.0


def _clock_seconds(text: str) -> float:
    hh, mm = text.split(":")
    return int(hh) * 3600 + int(mm) * 60


@dataclass(frozen=True)
class LocationModel:
    temp_mean: float
    humidity_mean: float
    temp_noise_sd: float = 0.3
    draft_rate_per_day: float = 1.0
    draft_depth_c: float = 2.0
    draft_duration_min: float = 20.0
    humidity_band: float = 8.0
    lux_peak: float = 871.0
    lux_attenuation: float = 1.0
    sunrise: str = "09:30"  # late-November daylight at the study's latitude
    sunset: str = "15:00"
    cloud_noise: float = 0.3

    def __post_init__(self):
        for name in (
            "temp_noise_sd",
            "draft_rate_per_day",
            "draft_depth_c",
            "draft_duration_min",
            "humidity_band",
            "lux_peak",
            "cloud_noise",
        ):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be >= 0")
        if not 0 < self.lux_attenuation <= 1:
            raise ValueError("lux_attenuation must be in (0, 1]")
        if _clock_seconds(self.sunrise) >= _clock_seconds(self.sunset):
            raise ValueError("sunrise must precede sunset")


@dataclass(frozen=True)
class SimConfig:
    locations: dict[str, LocationModel]
    start_ms: int
    duration_days: float
    interval_s: float
    seed: int

    def __post_init__(self):
        if not self.locations:
            raise ValueError("at least one location required")
        if self.duration_days <= 0:
            raise ValueError("duration_days must be > 0")
        if self.interval_s <= 0:
            raise ValueError("interval_s must be > 0")

    def to_dict(self) -> dict:
        return {
            "start": format_timestamp_ms(self.start_ms),
            "duration_days": self.duration_days,
            "interval_s": self.interval_s,
            "seed": self.seed,
            "locations": {label: asdict(m) for label, m in self.locations.items()},
        }


def config_from_dict(raw: dict) -> SimConfig:
    return SimConfig(
        locations={
            label: LocationModel(**model) for label, model in raw["locations"].items()
        },
        start_ms=parse_timestamp_ms(raw["start"]),
        duration_days=float(raw["duration_days"]),
        interval_s=float(raw["interval_s"]),
        seed=int(raw["seed"]),
    )


def load_config(path: str | Path) -> SimConfig:
    with open(path, encoding="utf-8") as fh:
        return config_from_dict(json.load(fh))


def location_seed(seed: int, label: str) -> int:
    """Stable 64-bit per-location key: seed XOR blake2b64(label)."""
    digest = blake2b(label.encode("utf-8"), digest_size=8).digest()
    return (seed ^ int.from_bytes(digest, "big")) & ((1 << 64) - 1)


def diurnal_lux(second_of_day: float, model: LocationModel, cloud: float = 0.0) -> float:
    """Illuminance at a clock time: zero outside [sunrise, sunset], a
    scaled half-sine inside, clamped at zero under heavy cloud noise."""
    sunrise = _clock_seconds(model.sunrise)
    sunset = _clock_seconds(model.sunset)
    if not sunrise < second_of_day < sunset:
        return 0.0
    base = (
        model.lux_peak
        * model.lux_attenuation
        * math.sin(math.pi * (second_of_day - sunrise) / (sunset - sunrise))
    )
    return max(0.0, base * (1.0 + cloud))


def attenuation_for_mean_lux(
    lux_peak: float, sunrise: str, sunset: str, target_mean: float
) -> float:
    """Attenuation that makes the diurnal curve's all-day mean equal the
    target (continuum approximation; sampling error is negligible)."""
    daylight = _clock_seconds(sunset) - _clock_seconds(sunrise)
    att = target_mean * 86400 * math.pi / (lux_peak * daylight * 2)
    if not 0 < att <= 1:
        raise ValueError(
            f"target mean {target_mean} not reachable with peak {lux_peak}"
        )
    return att


@dataclass(frozen=True)
class LocationArrays:
    """Raw simulated channels for one location (numpy, full precision)."""

    timestamps_ms: np.ndarray
    temperature_c: np.ndarray
    humidity_pct: np.ndarray
    illuminance_lux: np.ndarray


def _simulate_location(
    model: LocationModel, config: SimConfig, key: int
) -> LocationArrays:
    n = math.floor(config.duration_days * 86400 / config.interval_s) + 1
    rng = np.random.Generator(np.random.Philox(key=key))
    interval_ms = round(config.interval_s * 1000)
    timestamps = config.start_ms + np.arange(n, dtype=np.int64) * interval_ms

    # temperature: AR(1) with stationary sd temp_noise_sd
    phi = TEMP_AR1_COEFF_AT_5S ** (config.interval_s / REFERENCE_INTERVAL_S)
    innovations = rng.standard_normal(n) * (model.temp_noise_sd * math.sqrt(1 - phi * phi))
    ar_noise = lfilter([1.0], [1.0, -phi], innovations)

    # humidity: reflected random walk inside [mean - band/2, mean + band/2]
    steps = rng.standard_normal(n)
    if model.humidity_band > 0:
        step_sd = (
            model.humidity_band
            * HUMIDITY_STEP_FRACTION
            * math.sqrt(config.interval_s / REFERENCE_INTERVAL_S)
        )
        walk = model.humidity_mean + np.cumsum(steps) * step_sd
        lo = model.humidity_mean - model.humidity_band / 2
        band = model.humidity_band
        folded = np.mod(walk - lo, 2 * band)
        humidity = lo + (band - np.abs(folded - band))
    else:
        humidity = np.full(n, model.humidity_mean)

    # illuminance: diurnal half-sine with bounded multiplicative cloud noise
    cloud = rng.uniform(-model.cloud_noise, model.cloud_noise, n)
    second_of_day = (timestamps / 1000.0) % 86400.0
    sunrise = _clock_seconds(model.sunrise)
    sunset = _clock_seconds(model.sunset)
    daylight = (second_of_day > sunrise) & (second_of_day < sunset)
    base = (
        model.lux_peak
        * model.lux_attenuation
        * np.sin(np.pi * (second_of_day - sunrise) / (sunset - sunrise))
    )
    lux = np.where(daylight, np.clip(base * (1.0 + cloud), 0.0, None), 0.0)

    # drafts: Poisson-arriving rectangular dips
    duration_s = config.duration_days * 86400
    draft_count = int(rng.poisson(model.draft_rate_per_day * config.duration_days))
    draft_starts = np.sort(rng.uniform(0, duration_s, size=draft_count))
    relative_s = np.arange(n) * config.interval_s
    in_draft = np.zeros(n, dtype=bool)
    for start in draft_starts:
        in_draft |= (relative_s >= start) & (relative_s < start + model.draft_duration_min * 60)
    temperature = model.temp_mean + ar_noise - model.draft_depth_c * in_draft

    return LocationArrays(
        timestamps_ms=timestamps,
        temperature_c=temperature,
        humidity_pct=humidity,
        illuminance_lux=lux,
    )


def simulate_arrays(config: SimConfig) -> dict[str, LocationArrays]:
    return {
        label: _simulate_location(model, config, location_seed(config.seed, label))
        for label, model in config.locations.items()
    }


def simulate(config: SimConfig) -> dict[str, list[SensorReading]]:
    """Deterministic readings per location; sample count per location is
    floor(duration / interval) + 1."""
    out = {}
    for label, arrays in simulate_arrays(config).items():
        out[label] = [
            SensorReading(
                sensor_id=label,
                timestamp=int(ts),
                temperature_c=float(t),
                humidity_pct=float(h),
                illuminance_lux=float(l),
            )
            for ts, t, h, l in zip(
                arrays.timestamps_ms,
                arrays.temperature_c,
                arrays.humidity_pct,
                arrays.illuminance_lux,
            )
        ]
    return out


def write_location_csv(arrays: LocationArrays, dest: str | Path) -> int:
    """Stream one location's arrays to a CSV log; returns the row count."""
    n = len(arrays.timestamps_ms)
    with open(dest, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(CSV_HEADER + "\n")
        for i in range(n):
            fh.write(
                format_values_row(
                    int(arrays.timestamps_ms[i]),
                    float(arrays.temperature_c[i]),
                    float(arrays.humidity_pct[i]),
                    float(arrays.illuminance_lux[i]),
                )
                + "\n"
            )
    return n


def two_room_winter_config(
    start: str = "2018-11-24T00:00:00Z",
    duration_days: float = 14.0,
    interval_s: float = 5.0,
    seed: int = 1,
) -> SimConfig:
    """Two-location scenario calibrated to the reference field study:
    a warmer, dimmer corner and a colder, brighter window sill."""
    corner = LocationModel(
        temp_mean=19.48,
        humidity_mean=34.24,
        lux_peak=871.0,
        lux_attenuation=attenuation_for_mean_lux(871.0, "09:30", "15:00", 10.36),
    )
    window = LocationModel(
        temp_mean=17.59,
        humidity_mean=35.86,
        lux_peak=871.0,
        lux_attenuation=attenuation_for_mean_lux(871.0, "09:30", "15:00", 75.55),
    )
    return SimConfig(
        locations={"corner": corner, "window": window},
        start_ms=parse_timestamp_ms(start),
        duration_days=duration_days,
        interval_s=interval_s,
        seed=seed,
    )
