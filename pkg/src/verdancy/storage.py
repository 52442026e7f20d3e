"""Append-only reading persistence plus the CSV log schema.

One append-only segment file per sensor under the data directory, in the
same pinned CSV schema used for export/import: UTF-8, LF line endings,
ISO 8601 UTC timestamps, `.` decimal separator, empty field = absent
value.  Declared precision: temperature 3 decimals, humidity 4, lux 2.
Recovery is a rescan; a torn final record is dropped.
"""

from __future__ import annotations

import errno
import json
import os
import threading
from bisect import bisect_left, bisect_right
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Iterator
from urllib.parse import quote, unquote

from .ingest import MalformedRow, SensorReading
from .timeutil import format_timestamp_ms, parse_timestamp_ms

CSV_HEADER = "timestamp,temperature_c,humidity_pct,illuminance_lux"

_PRECISION = (3, 4, 2)  # temperature, humidity, illuminance decimals


class StorageError(Exception):
    pass


class OutOfOrder(StorageError):
    pass


class UnknownSensor(StorageError):
    def __init__(self, sensor_id: str):
        super().__init__(f"unknown sensor {sensor_id!r}")
        self.sensor_id = sensor_id


class StorageFull(StorageError):
    pass


class IOFailure(StorageError):
    pass


@dataclass(frozen=True)
class GapAnnotatedSeries:
    readings: list[SensorReading]
    gaps: list[tuple[int, int]]


def format_values_row(
    timestamp_ms: int,
    temperature: float | None,
    humidity: float | None,
    illuminance: float | None,
) -> str:
    cells = [format_timestamp_ms(timestamp_ms)]
    for value, digits in zip((temperature, humidity, illuminance), _PRECISION):
        cells.append("" if value is None else f"{value:.{digits}f}")
    return ",".join(cells)


def format_row(r: SensorReading) -> str:
    return format_values_row(
        r.timestamp, r.temperature_c, r.humidity_pct, r.illuminance_lux
    )


_ts_prefix_cache: dict[str, int] = {}


def _parse_row_timestamp(cell: str) -> int:
    # fast path for the fixed-width whole-second form the exporter writes;
    # replay files are a quarter million rows, full ISO parsing adds up
    if len(cell) == 20 and cell[19] == "Z" and cell[16] == ":":
        seconds = cell[17:19]
        if seconds.isdigit() and seconds <= "59":
            prefix = cell[:17]
            base = _ts_prefix_cache.get(prefix)
            if base is None:
                base = parse_timestamp_ms(prefix + "00Z")
                if len(_ts_prefix_cache) > 4096:
                    _ts_prefix_cache.clear()
                _ts_prefix_cache[prefix] = base
            return base + int(seconds) * 1000
    return parse_timestamp_ms(cell)


def parse_row_fields(
    line: str, line_no: int
) -> tuple[int, float | None, float | None, float | None]:
    """Parse one data row into (timestamp_ms, temperature, humidity, lux).

    Raises MalformedRow with the 1-based line number on any defect.
    """
    cells = line.split(",")
    if len(cells) != 4:
        raise MalformedRow(line_no, f"expected 4 fields, got {len(cells)}")
    try:
        ts = _parse_row_timestamp(cells[0])
    except ValueError as exc:
        raise MalformedRow(line_no, f"bad timestamp {cells[0]!r}: {exc}") from None
    values = []
    for name, cell in zip(("temperature", "humidity", "illuminance"), cells[1:]):
        if cell == "":
            values.append(None)
            continue
        try:
            values.append(float(cell))
        except ValueError:
            raise MalformedRow(line_no, f"bad {name} value {cell!r}") from None
    if all(v is None for v in values):
        raise MalformedRow(line_no, "row has no variable values")
    if values[2] is not None and values[2] < 0:
        raise MalformedRow(line_no, "illuminance must be >= 0")
    return ts, values[0], values[1], values[2]


def iter_csv(series: Iterable[SensorReading]) -> Iterator[str]:
    """Lines of a CSV document for a series, without trailing newlines."""
    yield CSV_HEADER
    for r in series:
        yield format_row(r)


def export_csv(series: Iterable[SensorReading], dest: str | Path) -> None:
    with open(dest, "w", encoding="utf-8", newline="\n") as fh:
        for line in iter_csv(series):
            fh.write(line + "\n")


def import_csv(source: str | Path, sensor_id: str) -> list[SensorReading]:
    """Read a CSV log back into a series (inverse of export at the
    declared precision)."""
    readings: list[SensorReading] = []
    with open(source, encoding="utf-8", newline="") as fh:
        header = fh.readline().rstrip("\r\n")
        if header != CSV_HEADER:
            raise MalformedRow(1, f"expected header {CSV_HEADER!r}")
        last_ts = None
        for line_no, line in enumerate(fh, start=2):
            line = line.rstrip("\r\n")
            if not line:
                continue
            ts, temperature, humidity, lux = parse_row_fields(line, line_no)
            if last_ts is not None and ts < last_ts:
                raise MalformedRow(line_no, "timestamp regression")
            last_ts = ts
            readings.append(
                SensorReading(
                    sensor_id=sensor_id,
                    timestamp=ts,
                    temperature_c=temperature,
                    humidity_pct=humidity,
                    illuminance_lux=lux,
                )
            )
    return readings


def annotate_gaps(
    series: list[SensorReading], gap_reset_s: float
) -> list[tuple[int, int]]:
    """(start, end) pairs where consecutive samples are more than the gap
    threshold apart."""
    limit = gap_reset_s * 1000
    gaps = []
    for a, b in zip(series, series[1:]):
        if b.timestamp - a.timestamp > limit:
            gaps.append((a.timestamp, b.timestamp))
    return gaps


def annotate(series: list[SensorReading], gap_reset_s: float) -> GapAnnotatedSeries:
    return GapAnnotatedSeries(series, annotate_gaps(series, gap_reset_s))


def _segment_name(sensor_id: str) -> str:
    return quote(sensor_id, safe="") + ".csv"


class EventLog:
    """Append-only alert-event log (JSON lines), chronological."""

    def __init__(self, path: str | Path | None = None):
        self._path = Path(path) if path else None
        self._events: list[dict] = []
        self._at_ms: list[int] = []
        self._lock = threading.Lock()
        self._fh = None
        if self._path is not None and self._path.exists():
            with open(self._path, encoding="utf-8") as fh:
                for line in fh:
                    line = line.strip()
                    if not line:
                        continue
                    try:
                        event = json.loads(line)
                    except json.JSONDecodeError:
                        break  # torn tail from a crash
                    self._events.append(event)
                    self._at_ms.append(parse_timestamp_ms(event["at"]))

    def append(self, event: dict) -> None:
        """Event dicts carry an ISO 8601 'at' field."""
        with self._lock:
            self._events.append(event)
            self._at_ms.append(parse_timestamp_ms(event["at"]))
            if self._path is not None:
                if self._fh is None:
                    self._fh = open(self._path, "a", encoding="utf-8", newline="\n")
                self._fh.write(json.dumps(event, separators=(",", ":")) + "\n")
                self._fh.flush()

    def since(self, since_ms: int | None = None) -> list[dict]:
        """Events strictly after since (all events when None)."""
        with self._lock:
            if since_ms is None:
                return list(self._events)
            start = bisect_right(self._at_ms, since_ms)
            return self._events[start:]

    def close(self) -> None:
        with self._lock:
            if self._fh is not None:
                self._fh.close()
                self._fh = None


class ReadingStore:
    """Per-sensor append-only segments with an in-memory index.

    data_dir=None keeps everything in memory (replay/test mode).  A
    single writer per sensor is assumed; queries take a lock only long
    enough to slice the index.
    """

    def __init__(
        self,
        data_dir: str | Path | None,
        *,
        sync: bool = False,
        retention_s: float | None = None,
    ):
        self._dir = Path(data_dir) if data_dir is not None else None
        self._sync = sync
        self._retention_ms = None if retention_s is None else retention_s * 1000
        self._pruned: set[str] = set()
        self._lock = threading.Lock()
        self._timestamps: dict[str, list[int]] = {}
        self._readings: dict[str, list[SensorReading]] = {}
        self._files: dict[str, object] = {}
        if self._dir is not None:
            self._dir.mkdir(parents=True, exist_ok=True)
            for seg in sorted(self._dir.glob("*.csv")):
                self._load_segment(seg)
            for sensor_id in list(self._readings):
                self._prune_locked(sensor_id)

    def _load_segment(self, path: Path) -> None:
        sensor_id = unquote(path.stem)
        readings: list[SensorReading] = []
        with open(path, encoding="utf-8", newline="") as fh:
            lines = fh.read().split("\n")
        if not lines or lines[0] != CSV_HEADER:
            raise IOFailure(f"segment {path} has a bad header")
        body = [l for l in lines[1:] if l]
        for idx, line in enumerate(body):
            try:
                ts, temperature, humidity, lux = parse_row_fields(line, idx + 2)
            except MalformedRow:
                if idx == len(body) - 1:
                    break  # torn final record from a crash; drop it
                raise
            readings.append(
                SensorReading(sensor_id, ts, temperature, humidity, lux)
            )
        self._timestamps[sensor_id] = [r.timestamp for r in readings]
        self._readings[sensor_id] = readings
        # rewrite if we dropped a torn tail, so the segment is clean again
        if len(readings) != len(body):
            export_csv(readings, path)

    def _open_segment(self, sensor_id: str):
        fh = self._files.get(sensor_id)
        if fh is None:
            path = self._dir / _segment_name(sensor_id)
            fresh = not path.exists()
            fh = open(path, "a", encoding="utf-8", newline="\n")
            if fresh:
                fh.write(CSV_HEADER + "\n")
            self._files[sensor_id] = fh
        return fh

    def _prune_locked(self, sensor_id: str) -> None:
        """Drop readings older than the retention window (relative to the
        sensor's newest sample).  Segments are compacted on close."""
        if self._retention_ms is None:
            return
        ts_list = self._timestamps.get(sensor_id)
        if not ts_list:
            return
        cutoff = ts_list[-1] - self._retention_ms
        cut = bisect_left(ts_list, cutoff)
        if cut > 0:
            del ts_list[:cut]
            del self._readings[sensor_id][:cut]
            self._pruned.add(sensor_id)

    def ensure_sensor(self, sensor_id: str) -> None:
        with self._lock:
            if sensor_id not in self._readings:
                self._timestamps[sensor_id] = []
                self._readings[sensor_id] = []
                if self._dir is not None:
                    self._open_segment(sensor_id)

    def append(self, reading: SensorReading) -> None:
        """Durably append one reading; rejects timestamp regressions."""
        sid = reading.sensor_id
        with self._lock:
            ts_list = self._timestamps.setdefault(sid, [])
            rows = self._readings.setdefault(sid, [])
            if ts_list and reading.timestamp < ts_list[-1]:
                raise OutOfOrder(
                    f"reading at {reading.timestamp} behind stored {ts_list[-1]}"
                )
            if self._dir is not None:
                try:
                    fh = self._open_segment(sid)
                    fh.write(format_row(reading) + "\n")
                    fh.flush()
                    if self._sync:
                        os.fsync(fh.fileno())
                except OSError as exc:
                    if exc.errno == errno.ENOSPC:
                        raise StorageFull(str(exc)) from exc
                    raise IOFailure(str(exc)) from exc
            ts_list.append(reading.timestamp)
            rows.append(reading)
            self._prune_locked(sid)

    def sensors(self) -> list[str]:
        with self._lock:
            return sorted(self._readings)

    def query(self, sensor_id: str, from_ms: int, to_ms: int) -> list[SensorReading]:
        """Readings with from <= t < to, in order."""
        if from_ms > to_ms:
            raise ValueError("query range is inverted")
        with self._lock:
            if sensor_id not in self._readings:
                raise UnknownSensor(sensor_id)
            ts_list = self._timestamps[sensor_id]
            lo = bisect_left(ts_list, from_ms)
            hi = bisect_left(ts_list, to_ms)
            return self._readings[sensor_id][lo:hi]

    def latest(self, sensor_id: str) -> SensorReading | None:
        with self._lock:
            if sensor_id not in self._readings:
                raise UnknownSensor(sensor_id)
            rows = self._readings[sensor_id]
            return rows[-1] if rows else None

    def close(self) -> None:
        with self._lock:
            for fh in self._files.values():
                fh.close()
            self._files.clear()
            if self._dir is not None:
                for sensor_id in self._pruned:  # compact retention-trimmed segments
                    export_csv(
                        self._readings[sensor_id], self._dir / _segment_name(sensor_id)
                    )
                self._pruned.clear()
