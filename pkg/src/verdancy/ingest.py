"""Measurement sources -> one normalized, ordered, de-duplicated stream.

Sources are replay files (the storage CSV schema), the climate simulator,
or an external live-capture adapter feeding line-delimited records.  BLE
advertisements repeat and may arrive slightly out of order, so the stream
is de-duplicated by (sensor, sequence) and reordered inside a bounded
tolerance window.
"""

from __future__ import annotations

import heapq
import time
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Iterator

from .codec import DecodedMeasurement, decode, payload_from_hex
from .timeutil import parse_timestamp_ms

# "every few seconds" pinned to a 5 s default; reorder window is twice that
DEFAULT_SAMPLING_INTERVAL_S = 5.0
REORDER_TOLERANCE_FACTOR = 2.0

VARIABLE_FIELDS = {
    "temperature": "temperature_c",
    "humidity": "humidity_pct",
    "illuminance": "illuminance_lux",
}


class EmptyReading(ValueError):
    """No measured variable present."""


class MalformedRow(ValueError):
    def __init__(self, line_no: int, message: str):
        super().__init__(f"line {line_no}: {message}")
        self.line_no = line_no


class NonMonotonicTimestamp(ValueError):
    def __init__(self, line_no: int, message: str):
        super().__init__(f"line {line_no}: {message}")
        self.line_no = line_no


@dataclass(frozen=True)
class SensorReading:
    """Normalized sample for one sensor channel.  At least one of the
    three measured variables is present; timestamp is UTC ms."""

    sensor_id: str
    timestamp: int
    temperature_c: float | None = None
    humidity_pct: float | None = None
    illuminance_lux: float | None = None
    sequence: int | None = None


@dataclass(frozen=True)
class SourceDescriptor:
    kind: str  # replay | simulation | live-adapter
    location_label: str
    sampling_interval: float = DEFAULT_SAMPLING_INTERVAL_S

    def __post_init__(self):
        if self.sampling_interval <= 0:
            raise ValueError("sampling_interval must be > 0")


def normalize(
    m: DecodedMeasurement | None,
    sensor_id: str,
    timestamp_ms: int,
    host_lux: float | None = None,
) -> SensorReading:
    """Merge a decoded tag measurement with the co-located host light
    sensor into one reading.

    Raises:
        EmptyReading: neither the tag nor the host contributed a variable.
    """
    temperature = float(m.temperature_c) if m is not None and m.temperature_c is not None else None
    humidity = float(m.humidity_pct) if m is not None and m.humidity_pct is not None else None
    if host_lux is not None and host_lux < 0:
        raise ValueError("illuminance must be >= 0")
    lux = float(host_lux) if host_lux is not None else None
    if temperature is None and humidity is None and lux is None:
        raise EmptyReading(f"no variable present for sensor {sensor_id!r}")
    if timestamp_ms <= 0:
        raise ValueError("timestamp must be positive UTC milliseconds")
    return SensorReading(
        sensor_id=sensor_id,
        timestamp=timestamp_ms,
        temperature_c=temperature,
        humidity_pct=humidity,
        illuminance_lux=lux,
        sequence=m.sequence if m is not None else None,
    )


def open_replay(
    path: str | Path,
    *,
    sensor_id: str | None = None,
    speed: float | None = None,
    sampling_interval_s: float = DEFAULT_SAMPLING_INTERVAL_S,
) -> Iterator[SensorReading]:
    """Stream readings from a CSV log file in file order.

    speed=None is batch mode (no pacing); a finite speed sleeps
    delta_t / speed between consecutive rows.  The sensor id defaults to
    the file stem.

    Raises:
        MalformedRow: header mismatch or unparseable row (with line number).
        NonMonotonicTimestamp: a timestamp regresses beyond the reorder
            tolerance (2 x sampling interval).
    """
    from . import storage  # local import: storage owns the CSV schema

    path = Path(path)
    sid = sensor_id if sensor_id is not None else path.stem
    tolerance_ms = REORDER_TOLERANCE_FACTOR * sampling_interval_s * 1000
    max_ts: int | None = None
    prev_ts: int | None = None
    with open(path, encoding="utf-8", newline="") as fh:
        header = fh.readline().rstrip("\r\n")
        if header != storage.CSV_HEADER:
            raise MalformedRow(1, f"expected header {storage.CSV_HEADER!r}")
        for line_no, line in enumerate(fh, start=2):
            line = line.rstrip("\r\n")
            if not line:
                continue
            ts, temperature, humidity, lux = storage.parse_row_fields(line, line_no)
            if max_ts is not None and ts < max_ts - tolerance_ms:
                raise NonMonotonicTimestamp(
                    line_no, f"timestamp regressed {(max_ts - ts) / 1000:.1f}s"
                )
            max_ts = ts if max_ts is None else max(max_ts, ts)
            if speed is not None and prev_ts is not None and ts > prev_ts:
                time.sleep((ts - prev_ts) / 1000.0 / speed)
            prev_ts = ts
            yield SensorReading(
                sensor_id=sid,
                timestamp=ts,
                temperature_c=temperature,
                humidity_pct=humidity,
                illuminance_lux=lux,
            )


class StreamOrderer:
    """Bounded-memory reorder + de-duplication buffer.

    A reading is dropped if its (sensor, sequence) equals the previously
    accepted one, or if it arrives older than what was already emitted
    for its sensor (counted in dropped_late).  Buffered readings are
    released once the incoming timestamp has moved past them by the
    tolerance window, so per-sensor output timestamps never decrease.
    """

    def __init__(self, tolerance_ms: float):
        self._tolerance = tolerance_ms
        self._heaps: dict[str, list] = {}
        self._last_seq: dict[str, int] = {}
        self._last_emitted: dict[str, int] = {}
        self._arrival = 0
        self.dropped_late = 0
        self.dropped_duplicates = 0

    def push(self, r: SensorReading) -> list[SensorReading]:
        sid = r.sensor_id
        if r.sequence is not None and self._last_seq.get(sid) == r.sequence:
            self.dropped_duplicates += 1
            return []
        if sid in self._last_emitted and r.timestamp < self._last_emitted[sid]:
            self.dropped_late += 1
            return []
        if r.sequence is not None:
            self._last_seq[sid] = r.sequence
        heap = self._heaps.setdefault(sid, [])
        heapq.heappush(heap, (r.timestamp, self._arrival, r))
        self._arrival += 1
        released = []
        while heap and heap[0][0] <= r.timestamp - self._tolerance:
            released.append(heapq.heappop(heap)[2])
        if released:
            self._last_emitted[sid] = released[-1].timestamp
        return released

    def flush(self) -> list[SensorReading]:
        remaining = []
        for sid, heap in self._heaps.items():
            items = []
            while heap:
                items.append(heapq.heappop(heap))
            if items:
                self._last_emitted[sid] = items[-1][0]
                remaining.extend(items)
        remaining.sort(key=lambda item: (item[0], item[1]))
        return [item[2] for item in remaining]


def dedupe_and_order(
    stream: Iterable[SensorReading],
    tolerance_ms: float = REORDER_TOLERANCE_FACTOR * DEFAULT_SAMPLING_INTERVAL_S * 1000,
) -> Iterator[SensorReading]:
    orderer = StreamOrderer(tolerance_ms)
    for r in stream:
        yield from orderer.push(r)
    yield from orderer.flush()


def parse_live_line(line: str) -> SensorReading:
    """Parse one live-adapter record: `<ISO8601> <sensor_id> <hex-payload> [<lux>]`."""
    parts = line.split()
    if len(parts) not in (3, 4):
        raise ValueError(f"expected 3 or 4 fields, got {len(parts)}")
    ts = parse_timestamp_ms(parts[0])
    measurement = decode(payload_from_hex(parts[2]))
    lux = float(parts[3]) if len(parts) == 4 else None
    return normalize(measurement, parts[1], ts, host_lux=lux)
