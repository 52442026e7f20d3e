import { describe, expect, it } from "vitest";

import {
  activeBanners,
  applyAlert,
  applyPlantAdded,
  applyPlantRemoved,
  applyReading,
  initialState,
  loadSnapshot,
  setOnline,
  viewModel,
  type AppState,
} from "../src/state.js";
import type { AlertEvent, LiveSnapshot, Plant, SensorLive } from "../src/types.js";

const lily: Plant = {
  instance_id: "p1",
  species_id: "peace_lily",
  sensor_id: "window",
  display_name: "Lily",
  added_at: "2018-11-24T00:00:00Z",
};

function reading(sensor: string, at: string, temp: number | null): SensorLive {
  return {
    sensor_id: sensor,
    at,
    temperature_c: temp,
    humidity_pct: 34.2,
    illuminance_lux: 10.4,
  };
}

function alertEvent(kind: AlertEvent["kind"], at: string, variable = "temperature"): AlertEvent {
  return {
    instance_id: "p1",
    variable,
    kind,
    severity: "WARNING",
    direction: "LOW",
    value: 17.59,
    bound: 18.0,
    at,
  };
}

function withPlants(state: AppState): AppState {
  return applyPlantAdded(state, lily);
}

describe("tiles", () => {
  it("renders the latest reading per sensor", () => {
    let state = initialState();
    state = applyReading(state, reading("window", "2018-11-24T10:00:00Z", 17.5));
    state = applyReading(state, reading("window", "2018-11-24T10:00:05Z", 17.6));
    state = applyReading(state, reading("corner", "2018-11-24T10:00:05Z", 19.5));
    const vm = viewModel(state);
    expect(vm.tiles.map((t) => t.sensorId)).toEqual(["corner", "window"]);
    expect(vm.tiles[1].temperature).toBe(17.6);
    expect(vm.tiles[1].at).toBe("2018-11-24T10:00:05Z");
  });

  it("selects the first sensor automatically", () => {
    let state = initialState();
    state = applyReading(state, reading("window", "2018-11-24T10:00:00Z", 17.5));
    expect(viewModel(state).selectedSensor).toBe("window");
  });
});

describe("banners", () => {
  it("appear on RAISED and clear on RECOVERED", () => {
    let state = withPlants(initialState());
    state = applyAlert(state, alertEvent("RAISED", "2018-11-24T10:30:00Z"));
    let banners = activeBanners(state);
    expect(banners).toHaveLength(1);
    expect(banners[0].plantName).toBe("Lily");
    expect(banners[0].variable).toBe("temperature");
    expect(banners[0].direction).toBe("LOW");

    state = applyAlert(state, alertEvent("RECOVERED", "2018-11-24T11:30:00Z"));
    expect(activeBanners(state)).toHaveLength(0);
  });

  it("present iff an un-recovered RAISED exists, per variable", () => {
    let state = withPlants(initialState());
    state = applyAlert(state, alertEvent("RAISED", "t1", "temperature"));
    state = applyAlert(state, alertEvent("RAISED", "t2", "humidity"));
    state = applyAlert(state, alertEvent("RECOVERED", "t3", "temperature"));
    const banners = activeBanners(state);
    expect(banners.map((b) => b.variable)).toEqual(["humidity"]);
  });

  it("clear when the plant is removed", () => {
    let state = withPlants(initialState());
    state = applyAlert(state, alertEvent("RAISED", "t1"));
    expect(activeBanners(state)).toHaveLength(1);
    state = applyPlantRemoved(state, "p1");
    expect(activeBanners(state)).toHaveLength(0);
  });

  it("escalation refreshes severity without duplicating the banner", () => {
    let state = withPlants(initialState());
    state = applyAlert(state, alertEvent("RAISED", "t1"));
    state = applyAlert(state, { ...alertEvent("ESCALATED", "t2"), severity: "CRITICAL" });
    const banners = activeBanners(state);
    expect(banners).toHaveLength(1);
    expect(banners[0].severity).toBe("CRITICAL");
  });
});

describe("refresh reconstruction", () => {
  it("cold load equals the incrementally built view", () => {
    // incremental session: readings + alerts over SSE
    let incremental = withPlants(setOnline(initialState(), true));
    incremental = applyReading(incremental, reading("window", "2018-11-24T10:00:00Z", 17.5));
    incremental = applyReading(incremental, reading("window", "2018-11-24T10:30:00Z", 17.4));
    incremental = applyAlert(incremental, alertEvent("RAISED", "2018-11-24T10:30:00Z"));

    // what the REST endpoints would return at that same instant
    const live: LiveSnapshot = {
      at: "2018-11-24T10:30:01Z",
      sensors: [reading("window", "2018-11-24T10:30:00Z", 17.4)],
      plants: [],
    };
    const cold = loadSnapshot(
      initialState(),
      live,
      [],
      [lily],
      [alertEvent("RAISED", "2018-11-24T10:30:00Z")],
    );

    expect(viewModel(cold)).toEqual(viewModel(incremental));
  });
});

describe("offline flag", () => {
  it("flips views to the offline banner state without losing data", () => {
    let state = withPlants(initialState());
    state = applyReading(state, reading("window", "2018-11-24T10:00:00Z", 17.5));
    state = setOnline(state, false);
    const vm = viewModel(state);
    expect(vm.online).toBe(false);
    expect(vm.tiles).toHaveLength(1);
  });
});
