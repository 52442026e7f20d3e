"""Operator command line: serve, decode, replay, simulate, report, export.

Exit codes: 0 success, 1 runtime error, 2 usage error.  Batch subcommands
are single-threaded and deterministic: identical inputs produce identical
stdout bytes.  Only `serve` opens a network listener.
"""

from __future__ import annotations

import argparse
import dataclasses
import os
import sys
import threading
from pathlib import Path

from . import timeutil
from .alerts import AlertEngine, AlertEvent, AlertRuleConfig, load_rules
from .analytics import LocationReport, location_report
from .catalog import CatalogError, PlantCatalog, load_default_species, load_species
from .codec import CodecError, DecodedMeasurement, decode, payload_from_hex
from .ingest import StreamOrderer, dedupe_and_order, open_replay, parse_live_line
from .storage import ReadingStore, StorageError, export_csv, import_csv
from .sim import load_config, simulate_arrays, write_location_csv

DATA_ENV_VAR = "VERDANCY_DATA"
UI_ENV_VAR = "VERDANCY_UI"

_DECODE_FIELDS = (
    ("format", "{}"),
    ("temperature_c", "{:.3f}"),
    ("humidity_pct", "{:.4f}"),
    ("pressure_pa", "{}"),
    ("accel_mg", "{}"),
    ("battery_mv", "{}"),
    ("tx_power_dbm", "{}"),
    ("movement_count", "{}"),
    ("sequence", "{}"),
    ("mac", "{}"),
)


def _decode_cell(m: DecodedMeasurement, name: str, fmt: str) -> str:
    value = getattr(m, name)
    if value is None:
        return ""
    if name == "mac":
        return value.hex()
    if name == "accel_mg":
        return "{}/{}/{}".format(*value)
    return fmt.format(value)


def cmd_decode(args) -> int:
    m = decode(payload_from_hex(args.hex))
    if args.format == "csv":
        names = [name for name, _ in _DECODE_FIELDS]
        print(",".join(names))
        print(",".join(_decode_cell(m, name, fmt) for name, fmt in _DECODE_FIELDS))
    else:
        for name, fmt in _DECODE_FIELDS:
            cell = _decode_cell(m, name, fmt)
            print(f"{name}: {cell if cell else 'absent'}")
    return 0


def _load_catalog(path: str | None) -> PlantCatalog:
    species = load_species(path) if path else load_default_species()
    return PlantCatalog(species)


def _format_event_line(e: AlertEvent) -> str:
    return (
        f"{timeutil.format_timestamp_ms(e.at)} {e.kind.value} {e.variable}"
        f" {e.direction.value} {e.severity.value}"
        f" value={e.value:.4f} bound={e.bound:.4f} plant={e.instance_id}"
    )


def cmd_replay(args) -> int:
    catalog = _load_catalog(args.species)
    rules = load_rules(args.rules) if args.rules else AlertRuleConfig()
    engine = AlertEngine(catalog, rules)

    path = Path(args.file)
    sensor_id = path.stem
    species_id = args.plant
    if species_id is None:
        if len(catalog.species) != 1:
            print(
                "error: catalog has several species; pick one with --plant",
                file=sys.stderr,
            )
            return 1
        species_id = next(iter(catalog.species))
    instance = catalog.add_instance(
        species_id, sensor_id, sensor_id, instance_id=f"plant-{sensor_id}", now_ms=0
    )
    engine.register_instance(instance)

    speed = None if args.batch else args.speed
    count = 0
    events = 0
    if args.format == "csv" and args.emit_alerts:
        print("at,kind,variable,direction,severity,value,bound,instance_id")
    stream = dedupe_and_order(open_replay(path, speed=speed))
    for reading in stream:
        count += 1
        for event in engine.process(reading):
            events += 1
            if args.emit_alerts:
                if args.format == "csv":
                    print(
                        f"{timeutil.format_timestamp_ms(event.at)},{event.kind.value},"
                        f"{event.variable},{event.direction.value},{event.severity.value},"
                        f"{event.value:.4f},{event.bound:.4f},{event.instance_id}"
                    )
                else:
                    print(_format_event_line(event))
    print(f"replayed {count} readings, {events} events", file=sys.stderr)
    return 0


def cmd_simulate(args) -> int:
    config = load_config(args.config)
    if args.seed is not None:
        config = dataclasses.replace(config, seed=args.seed)
    out = Path(args.out)
    labels = sorted(config.locations)
    arrays = simulate_arrays(config)
    if len(labels) == 1 and out.suffix == ".csv":
        targets = {labels[0]: out}
        out.parent.mkdir(parents=True, exist_ok=True)
    else:
        out.mkdir(parents=True, exist_ok=True)
        targets = {label: out / f"{label}.csv" for label in labels}
    for label in labels:
        rows = write_location_csv(arrays[label], targets[label])
        print(f"wrote {targets[label]} ({rows} rows)", file=sys.stderr)
    return 0


def _report_to_text(report: LocationReport) -> str:
    lines = ["location       temperature_c  humidity_pct  illuminance_lux  coverage"]
    for row in report.rows:
        t, h, l = row.stats.temperature, row.stats.humidity, row.stats.illuminance
        coverage = min(
            s.coverage_fraction for s in (t, h, l) if s.coverage_fraction is not None
        )
        cells = [
            f"{row.label:<13}",
            f"{t.mean:>13.4f}" if t.mean is not None else f"{'-':>13}",
            f"{h.mean:>12.4f}" if h.mean is not None else f"{'-':>12}",
            f"{l.mean:>15.2f}" if l.mean is not None else f"{'-':>15}",
            f"{coverage:>8.4f}",
        ]
        lines.append("  ".join(cells))
    if report.illuminance_ratio is not None:
        lines.append(f"illuminance ratio (brightest/dimmest): {report.illuminance_ratio:.2f}")
    return "\n".join(lines)


def _report_to_csv(report: LocationReport) -> str:
    lines = [
        "location,temperature_mean,humidity_mean,illuminance_mean,"
        "temperature_coverage,humidity_coverage,illuminance_coverage"
    ]
    for row in report.rows:
        cells = [row.label]
        for stats, digits in (
            (row.stats.temperature, 3),
            (row.stats.humidity, 4),
            (row.stats.illuminance, 2),
        ):
            cells.append("" if stats.mean is None else f"{stats.mean:.{digits}f}")
        for stats in (row.stats.temperature, row.stats.humidity, row.stats.illuminance):
            cells.append(
                ""
                if stats.coverage_fraction is None
                else f"{stats.coverage_fraction:.4f}"
            )
        lines.append(",".join(cells))
    return "\n".join(lines)


def cmd_report(args) -> int:
    series_by_label = {}
    for name in args.files:
        path = Path(name)
        series_by_label[path.stem] = import_csv(path, sensor_id=path.stem)
    from_ms = timeutil.parse_timestamp_ms(args.from_ts) if args.from_ts else None
    to_ms = timeutil.parse_timestamp_ms(args.to_ts) if args.to_ts else None
    report = location_report(series_by_label, from_ms, to_ms)
    if args.format == "csv":
        print(_report_to_csv(report))
    else:
        print(_report_to_text(report))
    return 0


def _data_dir(args) -> Path:
    raw = args.data or os.environ.get(DATA_ENV_VAR)
    if not raw:
        raise ValueError(f"--data not given and {DATA_ENV_VAR} unset")
    return Path(raw)


def cmd_export(args) -> int:
    store = ReadingStore(_data_dir(args) / "readings")
    try:
        series = store.query(
            args.sensor,
            timeutil.parse_timestamp_ms(args.from_ts),
            timeutil.parse_timestamp_ms(args.to_ts),
        )
        export_csv(series, args.out)
    finally:
        store.close()
    print(f"exported {len(series)} readings to {args.out}", file=sys.stderr)
    return 0


def _stdin_feeder(monitor, stop: threading.Event) -> None:
    """Consume live-adapter lines from stdin into the pipeline."""
    orderer = StreamOrderer(tolerance_ms=10_000)
    bad = 0
    for line in sys.stdin:
        if stop.is_set():
            break
        line = line.strip()
        if not line:
            continue
        try:
            reading = parse_live_line(line)
        except ValueError as exc:
            bad += 1
            print(f"ignoring bad input line: {exc}", file=sys.stderr)
            continue
        for ready in orderer.push(reading):
            monitor.ingest(ready)
    for ready in orderer.flush():
        monitor.ingest(ready)


def cmd_serve(args) -> int:
    import uvicorn

    from .api import Monitor, create_app

    host, _, port = args.listen.rpartition(":")
    if not host or not port.isdigit():
        print(f"error: --listen must be HOST:PORT, got {args.listen!r}", file=sys.stderr)
        return 2
    species = load_species(args.species) if args.species else load_default_species()
    rules = load_rules(args.rules) if args.rules else AlertRuleConfig()
    monitor = Monitor.open(_data_dir(args), species, rules)

    ui_dir = os.environ.get(UI_ENV_VAR)
    app = create_app(monitor, ui_dir=ui_dir)

    stop = threading.Event()
    feeder = threading.Thread(target=_stdin_feeder, args=(monitor, stop), daemon=True)
    feeder.start()
    try:
        uvicorn.run(app, host=host, port=int(port), log_level="info")
    finally:
        stop.set()
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="verdancy",
        description="Plant climate monitor: decode, replay, simulate, report, serve.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("serve", help="run the monitoring service")
    p.add_argument("--listen", default="127.0.0.1:8000", metavar="ADDR")
    p.add_argument("--data", metavar="DIR")
    p.add_argument("--species", metavar="FILE")
    p.add_argument("--rules", metavar="FILE")
    p.set_defaults(func=cmd_serve)

    p = sub.add_parser("decode", help="decode a hex sensor payload")
    p.add_argument("hex")
    p.add_argument("--format", choices=("text", "csv"), default="text")
    p.set_defaults(func=cmd_decode)

    p = sub.add_parser("replay", help="replay a CSV log through the alert engine")
    p.add_argument("file")
    pacing = p.add_mutually_exclusive_group()
    pacing.add_argument("--speed", type=float, default=1.0, metavar="X")
    pacing.add_argument("--batch", action="store_true", help="no pacing")
    p.add_argument("--species", metavar="FILE")
    p.add_argument("--plant", metavar="SPECIES_ID")
    p.add_argument("--rules", metavar="FILE")
    p.add_argument("--emit-alerts", action="store_true")
    p.add_argument("--format", choices=("text", "csv"), default="text")
    p.set_defaults(func=cmd_replay)

    p = sub.add_parser("simulate", help="generate a synthetic climate dataset")
    p.add_argument("--config", required=True, metavar="FILE")
    p.add_argument("--seed", type=int, metavar="N")
    p.add_argument("--out", required=True, metavar="FILE")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("report", help="per-location summary of CSV logs")
    p.add_argument("files", nargs="+", metavar="FILE")
    p.add_argument("--from", dest="from_ts", metavar="ISO8601")
    p.add_argument("--to", dest="to_ts", metavar="ISO8601")
    p.add_argument("--format", choices=("text", "csv"), default="text")
    p.set_defaults(func=cmd_report)

    p = sub.add_parser("export", help="export a stored reading range to CSV")
    p.add_argument("--data", metavar="DIR")
    p.add_argument("--sensor", required=True, metavar="ID")
    p.add_argument("--from", dest="from_ts", required=True, metavar="ISO8601")
    p.add_argument("--to", dest="to_ts", required=True, metavar="ISO8601")
    p.add_argument("--out", required=True, metavar="FILE")
    p.set_defaults(func=cmd_export)

    return parser


def run(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code is not None else 0
    try:
        return args.func(args)
    except (CodecError, CatalogError, StorageError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
