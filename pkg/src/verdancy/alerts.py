"""Duration-gated alerting: per-(plant, variable) hysteresis state machines.

A reading outside the optimal range does not alert immediately: the
breach must hold continuously for the breach duration D before RAISED is
emitted, and the value must stay back in range for the recover duration R
before RECOVERED clears the episode.  A single in-range sample resets a
pending breach.  Data gaps longer than the gap-reset threshold restart
PENDING/RECOVERING timing but never silently clear an active alert.

Pure, deterministic machinery: identical streams yield identical events.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass, replace
from enum import Enum

from .catalog import PlantCatalog, PlantInstance, ThresholdBands
from .ingest import VARIABLE_FIELDS, SensorReading


class Phase(str, Enum):
    OK = "OK"
    PENDING = "PENDING"
    ALERTING = "ALERTING"
    RECOVERING = "RECOVERING"


class Severity(str, Enum):
    WARNING = "WARNING"
    CRITICAL = "CRITICAL"


class Direction(str, Enum):
    LOW = "LOW"
    HIGH = "HIGH"


class EventKind(str, Enum):
    RAISED = "RAISED"
    ESCALATED = "ESCALATED"
    REPEATED = "REPEATED"
    RECOVERED = "RECOVERED"


_SEVERITY_RANK = {Severity.WARNING: 0, Severity.CRITICAL: 1}


class TimestampRegression(ValueError):
    pass


@dataclass(frozen=True)
class AlertRuleConfig:
    breach_duration_s: float = 1800.0  # D: "a more extended period"
    recover_duration_s: float = 900.0  # R: hysteresis against flapping
    renotify_interval_s: float | None = None  # C: absent = once per episode
    gap_reset_s: float = 600.0  # G

    def __post_init__(self):
        if self.breach_duration_s <= 0:
            raise ValueError("breach_duration_s must be > 0")
        if self.recover_duration_s <= 0:
            raise ValueError("recover_duration_s must be > 0")
        if self.renotify_interval_s is not None and self.renotify_interval_s <= 0:
            raise ValueError("renotify_interval_s must be > 0 when set")
        if self.gap_reset_s <= 0:
            raise ValueError("gap_reset_s must be > 0")


@dataclass(frozen=True)
class AlertState:
    """State of one (plant, variable) machine.  severity/direction track
    the episode's most severe classification; since is the current phase
    anchor (None right after a gap reset, re-anchored by the next sample)."""

    phase: Phase = Phase.OK
    since: int | None = None
    severity: Severity | None = None
    direction: Direction | None = None
    last_notified: int | None = None
    last_t: int | None = None
    last_value: float | None = None


@dataclass(frozen=True)
class AlertEvent:
    instance_id: str
    variable: str
    kind: EventKind
    severity: Severity
    direction: Direction
    value: float | None
    bound: float
    at: int


def classify(
    value: float, bands: ThresholdBands
) -> tuple[Direction, Severity] | None:
    """Classify a value against bands; None means in range.

    Bounds are inclusive on the in-range side; absent bounds never
    trigger.
    """
    if bands.critical_low is not None and value < bands.critical_low:
        return (Direction.LOW, Severity.CRITICAL)
    if bands.low is not None and value < bands.low:
        return (Direction.LOW, Severity.WARNING)
    if bands.critical_high is not None and value > bands.critical_high:
        return (Direction.HIGH, Severity.CRITICAL)
    if bands.high is not None and value > bands.high:
        return (Direction.HIGH, Severity.WARNING)
    return None


def violated_bound(
    bands: ThresholdBands, direction: Direction, severity: Severity
) -> float:
    if direction is Direction.LOW:
        bound = bands.critical_low if severity is Severity.CRITICAL else bands.low
    else:
        bound = bands.critical_high if severity is Severity.CRITICAL else bands.high
    assert bound is not None, "classification implies the bound exists"
    return bound


def step(
    state: AlertState,
    value: float,
    t_ms: int,
    bands: ThresholdBands,
    cfg: AlertRuleConfig,
    *,
    instance_id: str = "",
    variable: str = "",
) -> tuple[AlertState, list[AlertEvent]]:
    """Advance one machine by one reading; returns (new state, events).

    Raises:
        TimestampRegression: t_ms is behind the previous reading.
    """
    if state.last_t is not None and t_ms < state.last_t:
        raise TimestampRegression(f"t={t_ms} behind previous {state.last_t}")

    c = classify(value, bands)
    events: list[AlertEvent] = []
    phase = state.phase
    since = state.since
    severity = state.severity
    direction = state.direction
    last_notified = state.last_notified

    emit = None  # (kind, severity, direction); at most one event per step

    if phase is Phase.OK:
        if c is not None:
            phase = Phase.PENDING
            since = t_ms
            direction, severity = c

    elif phase is Phase.PENDING:
        if c is None:
            phase = Phase.OK
            since = severity = direction = None
        else:
            direction, severity = c
            if since is None:  # fresh start after a gap reset
                since = t_ms
            if t_ms - since >= cfg.breach_duration_s * 1000:
                phase = Phase.ALERTING
                since = t_ms
                emit = (EventKind.RAISED, severity, direction)
                last_notified = t_ms

    elif phase is Phase.ALERTING:
        if c is None:
            phase = Phase.RECOVERING
            since = t_ms
        else:
            new_direction, new_severity = c
            if _SEVERITY_RANK[new_severity] > _SEVERITY_RANK[severity]:
                direction, severity = new_direction, new_severity
                emit = (EventKind.ESCALATED, severity, direction)
                last_notified = t_ms
            elif (
                cfg.renotify_interval_s is not None
                and t_ms - last_notified >= cfg.renotify_interval_s * 1000
            ):
                emit = (EventKind.REPEATED, severity, direction)
                last_notified = t_ms

    elif phase is Phase.RECOVERING:
        if c is None:
            if since is None:
                since = t_ms
            if t_ms - since >= cfg.recover_duration_s * 1000:
                emit = (EventKind.RECOVERED, severity, direction)
                phase = Phase.OK
                since = severity = direction = None
                last_notified = None
        else:
            new_direction, new_severity = c
            phase = Phase.ALERTING
            since = t_ms
            if _SEVERITY_RANK[new_severity] > _SEVERITY_RANK[severity]:
                direction, severity = new_direction, new_severity
                emit = (EventKind.ESCALATED, severity, direction)
                last_notified = t_ms

    if emit is not None:
        kind, ev_severity, ev_direction = emit
        events.append(
            AlertEvent(
                instance_id,
                variable,
                kind,
                ev_severity,
                ev_direction,
                value,
                violated_bound(bands, ev_direction, ev_severity),
                t_ms,
            )
        )

    return (
        AlertState(phase, since, severity, direction, last_notified, t_ms, value),
        events,
    )


def step_gap(state: AlertState, gap_ms: float, cfg: AlertRuleConfig) -> AlertState:
    """Apply a data gap of gap_ms.  Gaps beyond the reset threshold
    restart PENDING/RECOVERING timing; ALERTING and OK are unchanged."""
    if gap_ms > cfg.gap_reset_s * 1000 and state.phase in (
        Phase.PENDING,
        Phase.RECOVERING,
    ):
        return replace(state, since=None)
    return state


def load_rules(path) -> AlertRuleConfig:
    """Rule config from a JSON file; absent keys keep their defaults."""
    import json

    with open(path, encoding="utf-8") as fh:
        raw = json.load(fh)
    allowed = {
        "breach_duration_s",
        "recover_duration_s",
        "renotify_interval_s",
        "gap_reset_s",
    }
    unknown = set(raw) - allowed
    if unknown:
        raise ValueError(f"unknown rule keys: {sorted(unknown)}")
    return AlertRuleConfig(**raw)


class AlertEngine:
    """Holds one machine per (plant instance, variable) and routes
    readings to every instance bound to the reading's sensor."""

    def __init__(self, catalog: PlantCatalog, cfg: AlertRuleConfig | None = None):
        self._catalog = catalog
        self.cfg = cfg or AlertRuleConfig()
        self._gap_limit_ms = self.cfg.gap_reset_s * 1000
        self._lock = threading.Lock()
        self._states: dict[tuple[str, str], AlertState] = {}
        self._bands: dict[tuple[str, str], ThresholdBands] = {}
        # sensor -> (catalog version, [(machine key, bands, value index)])
        self._routes: dict[str, tuple[int, list]] = {}

    def register_instance(self, instance: PlantInstance) -> None:
        profile = self._catalog.species[instance.species_id]
        with self._lock:
            for variable in VARIABLE_FIELDS:
                key = (instance.instance_id, variable)
                self._states.setdefault(key, AlertState())
                self._bands[key] = profile.bands_for(variable)

    def retire_instance(self, instance_id: str, at_ms: int) -> list[AlertEvent]:
        """Drop an instance's machines; an un-recovered episode gets a
        final recovery-by-removal event."""
        events = []
        with self._lock:
            for variable in VARIABLE_FIELDS:
                key = (instance_id, variable)
                state = self._states.pop(key, None)
                bands = self._bands.pop(key, None)
                if state is None or bands is None:
                    continue
                if state.phase in (Phase.ALERTING, Phase.RECOVERING):
                    events.append(
                        AlertEvent(
                            instance_id=instance_id,
                            variable=variable,
                            kind=EventKind.RECOVERED,
                            severity=state.severity,
                            direction=state.direction,
                            value=state.last_value,
                            bound=violated_bound(bands, state.direction, state.severity),
                            at=at_ms,
                        )
                    )
        return events

    def _route_for(self, sensor_id: str) -> list:
        cached = self._routes.get(sensor_id)
        if cached is not None and cached[0] == self._catalog.version:
            return cached[1]
        entries = []
        instances = sorted(
            self._catalog.instances_for_sensor(sensor_id), key=lambda i: i.instance_id
        )
        for instance in instances:
            profile = self._catalog.species[instance.species_id]
            for index, variable in enumerate(VARIABLE_FIELDS):
                entries.append(
                    (
                        (instance.instance_id, variable),
                        profile.bands_for(variable),
                        index,
                    )
                )
        self._routes[sensor_id] = (self._catalog.version, entries)
        return entries

    def process(self, reading: SensorReading) -> list[AlertEvent]:
        """Advance all machines watching this reading's sensor; inserts a
        gap reset when the reading follows a silence longer than G."""
        events: list[AlertEvent] = []
        t = reading.timestamp
        values = (reading.temperature_c, reading.humidity_pct, reading.illuminance_lux)
        with self._lock:
            for key, bands, index in self._route_for(reading.sensor_id):
                value = values[index]
                if value is None:
                    continue
                state = self._states.get(key)
                if state is None:
                    state = AlertState()
                    self._bands[key] = bands
                elif state.last_t is not None and t - state.last_t > self._gap_limit_ms:
                    state = step_gap(state, t - state.last_t, self.cfg)
                state, new_events = step(
                    state, value, t, bands, self.cfg, instance_id=key[0], variable=key[1]
                )
                self._states[key] = state
                if new_events:
                    events.extend(new_events)
        return events

    def states_for(self, instance_id: str) -> dict[str, AlertState]:
        with self._lock:
            return {
                variable: state
                for (iid, variable), state in self._states.items()
                if iid == instance_id
            }
