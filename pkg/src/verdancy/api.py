"""HTTP interface: live conditions, history, plant CRUD, alerts, SSE.

The Monitor class is the composition root of the pipeline: readings flow
through storage and the alert engine, and everything the endpoints serve
is reconstructible from the reading store plus the alert log.  The event
stream is plain Server-Sent Events; slow subscribers are disconnected
rather than buffered without bound.
"""

from __future__ import annotations

import json
import queue
import threading
from dataclasses import dataclass, field
from pathlib import Path

from fastapi import FastAPI, HTTPException, Request, Response
from fastapi.responses import StreamingResponse
from pydantic import BaseModel

from . import timeutil
from .alerts import AlertEngine, AlertEvent, AlertRuleConfig
from .analytics import Bucket, downsample
from .catalog import (
    CatalogError,
    PlantCatalog,
    PlantInstance,
    SpeciesProfile,
    UnknownInstance,
    UnknownSpecies,
)
from .ingest import SensorReading
from .storage import EventLog, ReadingStore, UnknownSensor, iter_csv

API_PREFIX = "/api/v1"


# -- wire serialization ----------------------------------------------------------


def reading_to_dict(r: SensorReading) -> dict:
    return {
        "sensor_id": r.sensor_id,
        "at": timeutil.format_timestamp_ms(r.timestamp),
        "temperature_c": r.temperature_c,
        "humidity_pct": r.humidity_pct,
        "illuminance_lux": r.illuminance_lux,
    }


def event_to_dict(e: AlertEvent) -> dict:
    return {
        "instance_id": e.instance_id,
        "variable": e.variable,
        "kind": e.kind.value,
        "severity": e.severity.value,
        "direction": e.direction.value,
        "value": e.value,
        "bound": e.bound,
        "at": timeutil.format_timestamp_ms(e.at),
    }


def instance_to_dict(i: PlantInstance) -> dict:
    return {
        "instance_id": i.instance_id,
        "species_id": i.species_id,
        "sensor_id": i.sensor_id,
        "display_name": i.display_name,
        "added_at": timeutil.format_timestamp_ms(i.added_at),
    }


def species_to_dict(p: SpeciesProfile) -> dict:
    def bands(b):
        return {
            "critical_low": b.critical_low,
            "low": b.low,
            "high": b.high,
            "critical_high": b.critical_high,
        }

    return {
        "species_id": p.species_id,
        "name": p.name,
        "description": p.description,
        "temperature": bands(p.temperature),
        "humidity": bands(p.humidity),
        "illuminance": bands(p.illuminance),
    }


def bucket_to_dict(b: Bucket) -> dict:
    def stats(s):
        return {"count": s.count, "mean": s.mean, "min": s.min, "max": s.max}

    return {
        "bucket_start": timeutil.format_timestamp_ms(b.bucket_start),
        "sample_count": b.sample_count,
        "temperature": stats(b.temperature),
        "humidity": stats(b.humidity),
        "illuminance": stats(b.illuminance),
    }


# -- event fan-out ------------------------------------------------------------------


@dataclass
class _Subscription:
    queue: queue.Queue = field(default_factory=lambda: queue.Queue(maxsize=256))
    closed: bool = False


class EventBus:
    """Fan-out of (kind, payload) messages to any number of subscribers.

    publish never blocks: a subscriber whose queue is full is marked
    closed and dropped.
    """

    def __init__(self, max_queue: int = 256):
        self._max_queue = max_queue
        self._subs: list[_Subscription] = []
        self._lock = threading.Lock()

    def subscribe(self) -> _Subscription:
        sub = _Subscription(queue.Queue(maxsize=self._max_queue))
        with self._lock:
            self._subs.append(sub)
        return sub

    def unsubscribe(self, sub: _Subscription) -> None:
        with self._lock:
            if sub in self._subs:
                self._subs.remove(sub)

    def publish(self, kind: str, payload: dict) -> None:
        with self._lock:
            subs = list(self._subs)
        for sub in subs:
            try:
                sub.queue.put_nowait((kind, payload))
            except queue.Full:
                sub.closed = True
                self.unsubscribe(sub)

    def subscriber_count(self) -> int:
        with self._lock:
            return len(self._subs)


# -- pipeline composition ---------------------------------------------------------------


class Monitor:
    """Store + catalog + alert engine + event fan-out, wired together."""

    def __init__(
        self,
        store: ReadingStore,
        catalog: PlantCatalog,
        engine: AlertEngine,
        event_log: EventLog | None = None,
        bus: EventBus | None = None,
        now_ms=timeutil.now_ms,
    ):
        self.store = store
        self.catalog = catalog
        self.engine = engine
        self.event_log = event_log if event_log is not None else EventLog()
        self.bus = bus if bus is not None else EventBus()
        self.now_ms = now_ms
        self._idempotency: dict[str, tuple[tuple, PlantInstance]] = {}
        for instance in catalog.list_instances():
            engine.register_instance(instance)

    @classmethod
    def open(
        cls,
        data_dir: str | Path,
        species: dict[str, SpeciesProfile],
        rules: AlertRuleConfig | None = None,
    ) -> "Monitor":
        """Monitor over a data directory (readings, plants, alert log)."""
        data_dir = Path(data_dir)
        data_dir.mkdir(parents=True, exist_ok=True)
        store = ReadingStore(data_dir / "readings")
        catalog = PlantCatalog(species, instances_path=data_dir / "plants.json")
        engine = AlertEngine(catalog, rules)
        return cls(store, catalog, engine, EventLog(data_dir / "alerts.jsonl"))

    def ingest(self, reading: SensorReading) -> list[AlertEvent]:
        """Persist one reading, advance alerting, and fan out events."""
        self.store.append(reading)
        events = self.engine.process(reading)
        self.bus.publish("reading", reading_to_dict(reading))
        for event in events:
            payload = event_to_dict(event)
            self.event_log.append(payload)
            self.bus.publish("alert", payload)
        return events

    def add_plant(
        self,
        species_id: str,
        sensor_id: str,
        display_name: str,
        idempotency_key: str | None = None,
    ) -> tuple[PlantInstance, bool]:
        """Returns (instance, created).  A replayed idempotency key with
        the same payload returns the original instance."""
        if idempotency_key is not None:
            hit = self._idempotency.get(idempotency_key)
            if hit is not None:
                payload, instance = hit
                if payload != (species_id, sensor_id, display_name):
                    raise IdempotencyConflict(idempotency_key)
                return instance, False
        instance = self.catalog.add_instance(
            species_id, sensor_id, display_name, now_ms=self.now_ms()
        )
        self.engine.register_instance(instance)
        if idempotency_key is not None:
            self._idempotency[idempotency_key] = (
                (species_id, sensor_id, display_name),
                instance,
            )
        return instance, True

    def remove_plant(self, instance_id: str) -> list[AlertEvent]:
        """Remove a plant; an active episode gets a final recovery event.
        History readings are retained."""
        self.catalog.get_instance(instance_id)  # raise before touching engine
        events = self.engine.retire_instance(instance_id, self.now_ms())
        self.catalog.remove_instance(instance_id)
        for event in events:
            payload = event_to_dict(event)
            self.event_log.append(payload)
            self.bus.publish("alert", payload)
        return events

    def live_snapshot(self) -> dict:
        now = self.now_ms()
        sensors = []
        for sensor_id in self.store.sensors():
            latest = self.store.latest(sensor_id)
            if latest is None:
                continue
            entry = reading_to_dict(latest)
            entry["age_s"] = max(0.0, (now - latest.timestamp) / 1000.0)
            sensors.append(entry)
        plants = []
        for instance in self.catalog.list_instances():
            states = self.engine.states_for(instance.instance_id)
            entry = instance_to_dict(instance)
            entry["alerts"] = {
                variable: {
                    "phase": state.phase.value,
                    "severity": state.severity.value if state.severity else None,
                    "direction": state.direction.value if state.direction else None,
                    "since": timeutil.format_timestamp_ms(state.since)
                    if state.since is not None
                    else None,
                }
                for variable, state in sorted(states.items())
            }
            plants.append(entry)
        return {"at": timeutil.format_timestamp_ms(now), "sensors": sensors, "plants": plants}


class IdempotencyConflict(CatalogError):
    def __init__(self, key: str):
        super().__init__(f"idempotency key {key!r} reused with a different payload")


# -- HTTP app ---------------------------------------------------------------------------


class AddPlantRequest(BaseModel):
    species_id: str
    sensor_id: str
    display_name: str = ""
    idempotency_key: str | None = None


def _parse_ts(raw: str | None, name: str) -> int:
    if raw is None:
        raise HTTPException(status_code=400, detail=f"missing query parameter {name!r}")
    try:
        return timeutil.parse_timestamp_ms(raw)
    except ValueError as exc:
        raise HTTPException(status_code=400, detail=f"bad {name!r}: {exc}") from None


def create_app(
    monitor: Monitor,
    *,
    sse_keepalive_s: float = 15.0,
    ui_dir: str | Path | None = None,
) -> FastAPI:
    app = FastAPI(title="verdancy", version="0.1.0")

    @app.get(API_PREFIX + "/live")
    def get_live():
        return monitor.live_snapshot()

    @app.get(API_PREFIX + "/history")
    def get_history(
        request: Request,
        sensor: str | None = None,
        to: str | None = None,
        bucket: str | None = None,
    ):
        # `from` is a Python keyword, so pull it straight off the query string
        from_ms = _parse_ts(request.query_params.get("from"), "from")
        to_ms = _parse_ts(to, "to")
        if sensor is None:
            raise HTTPException(status_code=400, detail="missing query parameter 'sensor'")
        if from_ms > to_ms:
            raise HTTPException(status_code=400, detail="'from' is after 'to'")
        try:
            bucket_s = float(bucket) if bucket is not None else 0.0
        except ValueError:
            raise HTTPException(status_code=400, detail="'bucket' must be a number") from None
        if bucket_s <= 0:
            raise HTTPException(status_code=400, detail="'bucket' must be > 0 seconds")
        try:
            series = monitor.store.query(sensor, from_ms, to_ms)
        except UnknownSensor:
            raise HTTPException(status_code=404, detail=f"unknown sensor {sensor!r}") from None
        buckets = downsample(series, round(bucket_s * 1000))
        return {"sensor_id": sensor, "buckets": [bucket_to_dict(b) for b in buckets]}

    @app.get(API_PREFIX + "/species")
    def list_species():
        return {
            "species": [
                species_to_dict(p)
                for _, p in sorted(monitor.catalog.species.items())
            ]
        }

    @app.get(API_PREFIX + "/plants")
    def list_plants():
        return {"plants": [instance_to_dict(i) for i in monitor.catalog.list_instances()]}

    @app.post(API_PREFIX + "/plants", status_code=201)
    def add_plant(body: AddPlantRequest, response: Response):
        try:
            instance, created = monitor.add_plant(
                body.species_id,
                body.sensor_id,
                body.display_name,
                idempotency_key=body.idempotency_key,
            )
        except UnknownSpecies as exc:
            raise HTTPException(status_code=404, detail=str(exc)) from None
        except IdempotencyConflict as exc:
            raise HTTPException(status_code=409, detail=str(exc)) from None
        except ValueError as exc:
            raise HTTPException(status_code=400, detail=str(exc)) from None
        if not created:
            response.status_code = 200
        return {"plant": instance_to_dict(instance), "created": created}

    @app.delete(API_PREFIX + "/plants/{instance_id}")
    def remove_plant(instance_id: str):
        try:
            events = monitor.remove_plant(instance_id)
        except UnknownInstance as exc:
            raise HTTPException(status_code=404, detail=str(exc)) from None
        return {"removed": instance_id, "events": [event_to_dict(e) for e in events]}

    @app.get(API_PREFIX + "/alerts")
    def get_alerts(since: str | None = None):
        since_ms = None
        if since is not None:
            since_ms = _parse_ts(since, "since")
        return {"events": monitor.event_log.since(since_ms)}

    @app.get(API_PREFIX + "/events")
    def stream_events():
        def generate():
            sub = monitor.bus.subscribe()
            try:
                yield ": connected\n\n"
                while not sub.closed:
                    try:
                        kind, payload = sub.queue.get(timeout=sse_keepalive_s)
                    except queue.Empty:
                        yield ": keepalive\n\n"
                        continue
                    data = json.dumps(payload, separators=(",", ":"))
                    yield f"event: {kind}\ndata: {data}\n\n"
            finally:
                monitor.bus.unsubscribe(sub)

        return StreamingResponse(
            generate(),
            media_type="text/event-stream",
            headers={"Cache-Control": "no-cache", "X-Accel-Buffering": "no"},
        )

    @app.get(API_PREFIX + "/export.csv")
    def export_readings(request: Request, sensor: str | None = None, to: str | None = None):
        from_ms = _parse_ts(request.query_params.get("from"), "from")
        to_ms = _parse_ts(to, "to")
        if sensor is None:
            raise HTTPException(status_code=400, detail="missing query parameter 'sensor'")
        if from_ms > to_ms:
            raise HTTPException(status_code=400, detail="'from' is after 'to'")
        try:
            series = monitor.store.query(sensor, from_ms, to_ms)
        except UnknownSensor:
            raise HTTPException(status_code=404, detail=f"unknown sensor {sensor!r}") from None
        return StreamingResponse(
            (line + "\n" for line in iter_csv(series)), media_type="text/csv"
        )

    if ui_dir is not None and Path(ui_dir).is_dir():
        from fastapi.staticfiles import StaticFiles

        app.mount("/", StaticFiles(directory=str(ui_dir), html=True), name="ui")

    return app
