import json

import pytest

from verdancy.cli import run
from verdancy.storage import CSV_HEADER, import_csv

PAYLOAD_NEG5 = "05" + "FC18" + "4E20" + "FFFF" + "8000" * 3 + "FFFF" + "FF" + "FFFF" + "FF" * 6


def write_rules(tmp_path, **kw):
    path = tmp_path / "rules.json"
    path.write_text(json.dumps(kw), encoding="utf-8")
    return path


def write_sim_config(
    tmp_path, locations=("corner",), days=0.01, seed=1, start="2018-11-24T00:00:00Z"
):
    attenuation = {"corner": 0.1, "window": 0.6}
    cfg = {
        "start": start,
        "duration_days": days,
        "interval_s": 5,
        "seed": seed,
        "locations": {
            label: {
                "temp_mean": 19.5,
                "humidity_mean": 35.0,
                "lux_attenuation": attenuation.get(label, 1.0),
            }
            for label in locations
        },
    }
    path = tmp_path / "sim.json"
    path.write_text(json.dumps(cfg), encoding="utf-8")
    return path


def breach_csv(tmp_path, name="corner.csv", rows=30, hum=34.24):
    """Rows 5 s apart with humidity below the Peace Lily optimal range."""
    lines = [CSV_HEADER]
    t = 0
    for _ in range(rows):
        mm, ss = divmod(t, 60)
        lines.append(f"2018-11-24T10:{mm:02d}:{ss:02d}Z,20.000,{hum:.4f},")
        t += 5
    path = tmp_path / name
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return path


# -- decode ---------------------------------------------------------------------


def test_decode_prints_temperature(capsys):
    assert run(["decode", PAYLOAD_NEG5]) == 0
    out = capsys.readouterr().out
    assert "-5.000" in out
    assert "50.000" in out


def test_decode_csv_format(capsys):
    assert run(["decode", PAYLOAD_NEG5, "--format", "csv"]) == 0
    out = capsys.readouterr().out.strip().split("\n")
    assert len(out) == 2
    header = out[0].split(",")
    values = out[1].split(",")
    assert dict(zip(header, values))["temperature_c"] == "-5.000"


def test_decode_bad_hex_is_runtime_error(capsys):
    assert run(["decode", "zz"]) == 1
    assert "error" in capsys.readouterr().err.lower()


def test_decode_is_deterministic(capsys):
    run(["decode", PAYLOAD_NEG5])
    first = capsys.readouterr().out
    run(["decode", PAYLOAD_NEG5])
    assert capsys.readouterr().out == first


# -- usage errors -----------------------------------------------------------------


def test_unknown_subcommand_exit_2(capsys):
    assert run(["frobnicate"]) == 2
    assert "usage" in capsys.readouterr().err.lower()


def test_no_subcommand_exit_2(capsys):
    assert run([]) == 2


def test_unknown_flag_exit_2(capsys):
    assert run(["decode", PAYLOAD_NEG5, "--bogus"]) == 2


# -- replay -----------------------------------------------------------------------


def test_replay_emits_low_humidity_alert(tmp_path, capsys):
    path = breach_csv(tmp_path, rows=30)
    rules = write_rules(tmp_path, breach_duration_s=60, recover_duration_s=30)
    code = run(["replay", str(path), "--batch", "--emit-alerts", "--rules", str(rules)])
    assert code == 0
    out = capsys.readouterr().out
    assert "RAISED" in out
    assert "humidity" in out
    assert "LOW" in out


def test_replay_deterministic_event_log(tmp_path, capsys):
    path = breach_csv(tmp_path, rows=30)
    rules = write_rules(tmp_path, breach_duration_s=60, recover_duration_s=30)
    run(["replay", str(path), "--batch", "--emit-alerts", "--rules", str(rules)])
    first = capsys.readouterr().out
    run(["replay", str(path), "--batch", "--emit-alerts", "--rules", str(rules)])
    assert capsys.readouterr().out == first
    assert first  # not empty


def test_replay_without_emit_alerts_prints_nothing(tmp_path, capsys):
    path = breach_csv(tmp_path, rows=10)
    assert run(["replay", str(path), "--batch"]) == 0
    assert capsys.readouterr().out == ""


def test_replay_missing_file_runtime_error(tmp_path, capsys):
    assert run(["replay", str(tmp_path / "nope.csv"), "--batch"]) == 1


# -- simulate ----------------------------------------------------------------------


def test_simulate_single_location_to_csv_file(tmp_path, capsys):
    cfg = write_sim_config(tmp_path)
    out = tmp_path / "corner.csv"
    assert run(["simulate", "--config", str(cfg), "--out", str(out)]) == 0
    series = import_csv(out, sensor_id="corner")
    assert len(series) == 173  # floor(0.01 * 86400 / 5) + 1


def test_simulate_two_locations_to_directory(tmp_path):
    cfg = write_sim_config(tmp_path, locations=("corner", "window"))
    out = tmp_path / "runs"
    assert run(["simulate", "--config", str(cfg), "--out", str(out)]) == 0
    assert (out / "corner.csv").exists()
    assert (out / "window.csv").exists()


def test_simulate_seed_determinism_and_override(tmp_path):
    cfg = write_sim_config(tmp_path, seed=5)
    a = tmp_path / "a.csv"
    b = tmp_path / "b.csv"
    c = tmp_path / "c.csv"
    run(["simulate", "--config", str(cfg), "--out", str(a)])
    run(["simulate", "--config", str(cfg), "--out", str(b)])
    run(["simulate", "--config", str(cfg), "--seed", "6", "--out", str(c)])
    assert a.read_bytes() == b.read_bytes()
    assert a.read_bytes() != c.read_bytes()


# -- report ------------------------------------------------------------------------


def test_report_two_locations(tmp_path, capsys):
    corner = breach_csv(tmp_path, name="corner.csv", rows=20, hum=34.24)
    window = breach_csv(tmp_path, name="window.csv", rows=20, hum=35.86)
    assert run(["report", str(corner), str(window)]) == 0
    out = capsys.readouterr().out
    assert "corner" in out and "window" in out
    assert "34.2400" in out and "35.8600" in out


def test_report_csv_format_matches_summarize(tmp_path, capsys):
    corner = breach_csv(tmp_path, name="corner.csv", rows=20)
    assert run(["report", str(corner), "--format", "csv"]) == 0
    lines = capsys.readouterr().out.strip().split("\n")
    header = lines[0].split(",")
    row = dict(zip(header, lines[1].split(",")))
    assert row["location"] == "corner"

    from verdancy.analytics import summarize

    series = import_csv(corner, sensor_id="corner")
    stats = summarize(series, series[0].timestamp, series[-1].timestamp + 1)
    assert float(row["humidity_mean"]) == pytest.approx(stats.humidity.mean, abs=1e-4)
    assert float(row["temperature_mean"]) == pytest.approx(stats.temperature.mean, abs=1e-3)


def test_report_ratio_line_in_text(tmp_path, capsys):
    # daytime window so illuminance is non-zero in both locations
    cfgpath = write_sim_config(
        tmp_path, locations=("corner", "window"), days=0.02, start="2018-11-24T10:00:00Z"
    )
    out = tmp_path / "runs"
    run(["simulate", "--config", str(cfgpath), "--out", str(out)])
    assert run(["report", str(out / "corner.csv"), str(out / "window.csv")]) == 0
    text = capsys.readouterr().out
    assert "illuminance ratio" in text


# -- export -------------------------------------------------------------------------


def test_export_range(tmp_path, capsys):
    data = tmp_path / "data"
    readings_dir = data / "readings"
    readings_dir.mkdir(parents=True)
    lines = [CSV_HEADER]
    for i in range(10):
        lines.append(f"2018-11-24T10:00:{i * 5:02d}Z,20.000,,")
    (readings_dir / "corner.csv").write_text("\n".join(lines) + "\n", encoding="utf-8")

    out = tmp_path / "slice.csv"
    code = run(
        [
            "export",
            "--data",
            str(data),
            "--sensor",
            "corner",
            "--from",
            "2018-11-24T10:00:10Z",
            "--to",
            "2018-11-24T10:00:30Z",
            "--out",
            str(out),
        ]
    )
    assert code == 0
    series = import_csv(out, sensor_id="corner")
    assert len(series) == 4  # half-open window


def test_export_env_var_data_fallback(tmp_path, capsys, monkeypatch):
    data = tmp_path / "data"
    (data / "readings").mkdir(parents=True)
    (data / "readings" / "s.csv").write_text(
        CSV_HEADER + "\n2018-11-24T10:00:00Z,20.000,,\n", encoding="utf-8"
    )
    monkeypatch.setenv("VERDANCY_DATA", str(data))
    out = tmp_path / "o.csv"
    code = run(
        [
            "export",
            "--sensor",
            "s",
            "--from",
            "2018-11-24T00:00:00Z",
            "--to",
            "2018-11-25T00:00:00Z",
            "--out",
            str(out),
        ]
    )
    assert code == 0
    assert len(import_csv(out, sensor_id="s")) == 1


def test_export_unknown_sensor_runtime_error(tmp_path, capsys):
    data = tmp_path / "data"
    (data / "readings").mkdir(parents=True)
    code = run(
        [
            "export",
            "--data",
            str(data),
            "--sensor",
            "ghost",
            "--from",
            "2018-11-24T00:00:00Z",
            "--to",
            "2018-11-25T00:00:00Z",
            "--out",
            str(tmp_path / "o.csv"),
        ]
    )
    assert code == 1
