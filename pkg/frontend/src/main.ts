// Bootstrap: wire the API client, the SSE stream, and the three screens.

import { ApiClient, ApiError, SubmissionGuard } from "./api.js";
import { buildSeries, drawHistory } from "./chart.js";
import {
  applyAlert,
  applyPlantAdded,
  applyPlantRemoved,
  applyReading,
  liveSnapshotPlants,
  loadSnapshot,
  selectSensor,
  setOnline,
  Store,
} from "./state.js";
import type { AlertEvent, SensorLive, Variable } from "./types.js";
import { VARIABLE_UNITS } from "./types.js";
import { renderAddPlant, renderDashboard, renderNav, renderPlants, type Screen } from "./views.js";

const api = new ApiClient();
const store = new Store();
const submission = new SubmissionGuard();

let screen: Screen = screenFromHash();
let addError: string | null = null;
let historyVariable: Variable = "temperature";

const navEl = document.getElementById("nav") as HTMLElement;
const mainEl = document.getElementById("screen") as HTMLElement;

function screenFromHash(): Screen {
  const hash = location.hash.replace("#/", "");
  return hash === "add" || hash === "plants" ? hash : "dashboard";
}

async function refresh(): Promise<void> {
  try {
    const [live, species, alerts] = await Promise.all([
      api.getLive(),
      api.getSpecies(),
      api.getAlerts(),
    ]);
    store.update(
      loadSnapshot(store.get(), live, species, liveSnapshotPlants(live), alerts),
    );
  } catch {
    store.update(setOnline(store.get(), false));
  }
}

function connectEvents(): void {
  const source = new EventSource("/api/v1/events");
  source.addEventListener("reading", (e) => {
    const reading = JSON.parse((e as MessageEvent).data) as SensorLive;
    store.update(applyReading(setOnline(store.get(), true), reading));
  });
  source.addEventListener("alert", (e) => {
    const event = JSON.parse((e as MessageEvent).data) as AlertEvent;
    store.update(applyAlert(store.get(), event));
  });
  source.onopen = () => {
    store.update(setOnline(store.get(), true));
    void refresh(); // reconcile anything missed while disconnected
  };
  source.onerror = () => {
    store.update(setOnline(store.get(), false));
    // EventSource reconnects by itself; state flips back online via onopen
  };
}

function render(): void {
  navEl.innerHTML = renderNav(screen);
  const state = store.get();
  if (screen === "dashboard") {
    mainEl.innerHTML = renderDashboard(state, Date.now());
    const select = document.getElementById("history-variable") as HTMLSelectElement | null;
    if (select) {
      select.value = historyVariable;
      select.onchange = () => {
        historyVariable = select.value as Variable;
        void redrawHistory();
      };
    }
    for (const group of mainEl.querySelectorAll<HTMLElement>(".tile-group")) {
      group.onclick = () => {
        store.update(selectSensor(store.get(), group.dataset.sensor ?? ""));
        void redrawHistory();
      };
    }
    void redrawHistory();
  } else if (screen === "add") {
    mainEl.innerHTML = renderAddPlant(
      state.species,
      Object.keys(state.sensors).sort(),
      addError,
    );
    wireAddScreen();
  } else {
    mainEl.innerHTML = renderPlants(state);
    for (const button of mainEl.querySelectorAll<HTMLButtonElement>("button.remove")) {
      button.onclick = () => void removePlant(button.dataset.remove ?? "");
    }
  }
}

async function redrawHistory(): Promise<void> {
  const sensor = store.get().selectedSensor;
  const canvas = document.getElementById("history-canvas") as HTMLCanvasElement | null;
  if (!sensor || !canvas) return;
  const now = Date.now();
  const from = new Date(now - 24 * 3600 * 1000).toISOString();
  const to = new Date(now + 60_000).toISOString();
  try {
    const history = await api.getHistory(sensor, from, to, 600);
    const ctx = canvas.getContext("2d");
    if (!ctx) return;
    drawHistory(
      ctx,
      canvas.width,
      canvas.height,
      buildSeries(history.buckets, historyVariable),
      VARIABLE_UNITS[historyVariable],
    );
  } catch {
    // keep the last drawing; offline banner already tells the story
  }
}

function wireAddScreen(): void {
  const sensorSelect = document.getElementById("add-sensor") as HTMLSelectElement;
  const customInput = document.getElementById("add-sensor-custom") as HTMLInputElement;
  const nameInput = document.getElementById("add-name") as HTMLInputElement;
  sensorSelect.onchange = () => {
    customInput.classList.toggle("hidden", sensorSelect.value !== "__custom");
  };
  for (const button of mainEl.querySelectorAll<HTMLButtonElement>("button.species")) {
    button.onclick = () => {
      const speciesId = button.dataset.species ?? "";
      const sensorId =
        sensorSelect.value === "__custom" ? customInput.value.trim() : sensorSelect.value;
      const name = nameInput.value.trim() || speciesNameFor(speciesId);
      void addPlant(speciesId, sensorId, name);
    };
  }
}

function speciesNameFor(speciesId: string): string {
  return store.get().species.find((s) => s.species_id === speciesId)?.name ?? speciesId;
}

async function addPlant(speciesId: string, sensorId: string, name: string): Promise<void> {
  if (!sensorId) {
    addError = "pick a sensor channel first";
    render();
    return;
  }
  if (submission.inFlight) return; // rapid re-tap: one request, one plant
  const key = submission.begin();
  try {
    const result = await api.addPlant({
      species_id: speciesId,
      sensor_id: sensorId,
      display_name: name,
      idempotency_key: key,
    });
    addError = null;
    store.update(applyPlantAdded(store.get(), result.plant));
    location.hash = "#/plants"; // plant appears in the list, no reload
  } catch (err) {
    addError = err instanceof ApiError ? err.message : "service unreachable";
    render(); // form state (inputs) is preserved; error shown inline
  } finally {
    submission.settle();
  }
}

async function removePlant(instanceId: string): Promise<void> {
  try {
    await api.removePlant(instanceId); // 404 inside counts as removed
    store.update(applyPlantRemoved(store.get(), instanceId));
    void refresh(); // pick up the recovery-by-removal events for banners
  } catch (err) {
    addError = err instanceof ApiError ? err.message : "service unreachable";
    render();
  }
}

window.addEventListener("hashchange", () => {
  screen = screenFromHash();
  addError = null;
  render();
});

store.subscribe(() => render());
setInterval(() => {
  if (screen === "dashboard") render(); // tick the age labels
}, 1000);

void refresh();
connectEvents();
render();
