"""Species profiles and user-managed plant instances.

A species profile carries the eight plant properties (name, min/max per
variable, description) as ordered threshold bands.  The optimal range is
the [low, high] pair; critical bands are optional extensions.  Plant
instances bind a species to a sensor channel.
"""

from __future__ import annotations

import json
import threading
import time
import uuid
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

VARIABLES = ("temperature", "humidity", "illuminance")


class CatalogError(Exception):
    pass


class InvalidBands(CatalogError):
    def __init__(self, species: str, variable: str):
        super().__init__(f"bands for {species}/{variable} violate ordering")
        self.species = species
        self.variable = variable


class DuplicateSpecies(CatalogError):
    def __init__(self, species_id: str):
        super().__init__(f"duplicate species id {species_id!r}")
        self.species_id = species_id


class UnknownSpecies(CatalogError):
    def __init__(self, species_id: str):
        super().__init__(f"unknown species {species_id!r}")
        self.species_id = species_id


class UnknownInstance(CatalogError):
    def __init__(self, instance_id: str):
        super().__init__(f"unknown plant instance {instance_id!r}")
        self.instance_id = instance_id


@dataclass(frozen=True)
class ThresholdBands:
    """Optional ordered bounds; absent bounds never trigger alerts."""

    critical_low: float | None = None
    low: float | None = None
    high: float | None = None
    critical_high: float | None = None

    def present(self) -> list[float]:
        return [
            b
            for b in (self.critical_low, self.low, self.high, self.critical_high)
            if b is not None
        ]

    def is_ordered(self) -> bool:
        present = self.present()
        return all(a < b for a, b in zip(present, present[1:]))


@dataclass(frozen=True)
class SpeciesProfile:
    species_id: str
    name: str
    temperature: ThresholdBands = field(default_factory=ThresholdBands)
    humidity: ThresholdBands = field(default_factory=ThresholdBands)
    illuminance: ThresholdBands = field(default_factory=ThresholdBands)
    description: str = ""

    def bands_for(self, variable: str) -> ThresholdBands:
        return getattr(self, variable)


@dataclass(frozen=True)
class PlantInstance:
    instance_id: str
    species_id: str
    sensor_id: str
    display_name: str
    added_at: int  # UTC ms


def _parse_bands(raw: dict, species_id: str, variable: str) -> ThresholdBands:
    known = {"critical_low", "low", "high", "critical_high"}
    unknown = set(raw) - known
    if unknown:
        raise InvalidBands(species_id, variable)
    bands = ThresholdBands(**{k: float(v) for k, v in raw.items()})
    if not bands.is_ordered():
        raise InvalidBands(species_id, variable)
    return bands


def load_species(path: str | Path) -> dict[str, SpeciesProfile]:
    """Load a species file (JSON array of profiles) keyed by species id.

    Raises:
        InvalidBands: a variable's bounds violate the ordering invariant.
        DuplicateSpecies: two profiles share an id.
    """
    with open(path, encoding="utf-8") as fh:
        raw = json.load(fh)
    return _build_catalog(raw)


def load_default_species() -> dict[str, SpeciesProfile]:
    """Catalog shipped with the package (currently the Peace Lily)."""
    text = resources.files("verdancy").joinpath("data/species.json").read_text("utf-8")
    return _build_catalog(json.loads(text))


def _build_catalog(raw: list[dict]) -> dict[str, SpeciesProfile]:
    catalog: dict[str, SpeciesProfile] = {}
    for entry in raw:
        species_id = str(entry["id"])
        if species_id in catalog:
            raise DuplicateSpecies(species_id)
        bands = {
            variable: _parse_bands(entry.get(variable, {}), species_id, variable)
            for variable in VARIABLES
        }
        catalog[species_id] = SpeciesProfile(
            species_id=species_id,
            name=str(entry.get("name", species_id)),
            description=str(entry.get("description", "")),
            **bands,
        )
    return catalog


class PlantCatalog:
    """Read-mostly catalog of species plus the user's plant instances.

    Mutations are serialized through a single lock; readers get snapshot
    copies.  With instances_path set, the instance list survives restarts
    as a JSON file.
    """

    def __init__(
        self,
        species: dict[str, SpeciesProfile],
        instances_path: str | Path | None = None,
    ):
        self.species = dict(species)
        self.version = 0  # bumped on any instance mutation; lets callers cache
        self._instances: dict[str, PlantInstance] = {}
        self._lock = threading.Lock()
        self._path = Path(instances_path) if instances_path else None
        if self._path is not None and self._path.exists():
            for raw in json.loads(self._path.read_text("utf-8")):
                inst = PlantInstance(**raw)
                if inst.species_id not in self.species:
                    raise UnknownSpecies(inst.species_id)
                self._instances[inst.instance_id] = inst

    def _save_locked(self) -> None:
        if self._path is None:
            return
        payload = [vars(i) for i in self._instances.values()]
        tmp = self._path.with_suffix(".tmp")
        tmp.write_text(json.dumps(payload, indent=2), encoding="utf-8")
        tmp.replace(self._path)

    def add_instance(
        self,
        species_id: str,
        sensor_id: str,
        display_name: str,
        *,
        instance_id: str | None = None,
        now_ms: int | None = None,
    ) -> PlantInstance:
        if species_id not in self.species:
            raise UnknownSpecies(species_id)
        if not sensor_id:
            raise ValueError("sensor_id must be non-empty")
        inst = PlantInstance(
            instance_id=instance_id or uuid.uuid4().hex,
            species_id=species_id,
            sensor_id=sensor_id,
            display_name=display_name,
            added_at=int(time.time() * 1000) if now_ms is None else now_ms,
        )
        with self._lock:
            if inst.instance_id in self._instances:
                raise ValueError(f"instance id {inst.instance_id!r} already exists")
            self._instances[inst.instance_id] = inst
            self.version += 1
            self._save_locked()
        return inst

    def remove_instance(self, instance_id: str) -> PlantInstance:
        with self._lock:
            try:
                removed = self._instances.pop(instance_id)
            except KeyError:
                raise UnknownInstance(instance_id) from None
            self.version += 1
            self._save_locked()
            return removed

    def get_instance(self, instance_id: str) -> PlantInstance:
        try:
            return self._instances[instance_id]
        except KeyError:
            raise UnknownInstance(instance_id) from None

    def list_instances(self) -> list[PlantInstance]:
        with self._lock:
            return sorted(self._instances.values(), key=lambda i: (i.added_at, i.instance_id))

    def instances_for_sensor(self, sensor_id: str) -> list[PlantInstance]:
        with self._lock:
            return [i for i in self._instances.values() if i.sensor_id == sensor_id]
