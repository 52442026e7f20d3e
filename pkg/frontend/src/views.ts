// Screen rendering.  Three screens mirror the monitor's mobile layout:
// Dashboard (live tiles + history graph + alert banners), Add plant,
// and Plants (management list).

import type { Banner } from "./state.js";
import { viewModel, type AppState } from "./state.js";
import type { Species, Variable } from "./types.js";
import { VARIABLE_UNITS } from "./types.js";

export type Screen = "dashboard" | "add" | "plants";

function esc(text: string): string {
  return text.replace(/[&<>"']/g, (c) => `&#${c.charCodeAt(0)};`);
}

function fmt(value: number | null, digits: number): string {
  return value === null ? "--" : value.toFixed(digits);
}

function bannerHtml(banner: Banner): string {
  const word = banner.direction === "LOW" ? "below" : "above";
  const cls = banner.severity === "CRITICAL" ? "banner critical" : "banner";
  return `<div class="${cls}" data-banner="${esc(banner.instanceId)}:${esc(banner.variable)}">
    <strong>${esc(banner.plantName)}</strong>: ${esc(banner.variable)} ${word} ${banner.bound}
    (now ${banner.value === null ? "?" : banner.value.toFixed(2)}) since ${esc(banner.since)}
  </div>`;
}

export function renderDashboard(state: AppState, nowMs: number): string {
  const vm = viewModel(state);
  const offline = vm.online
    ? ""
    : `<div class="banner offline">service unreachable - retrying</div>`;
  const banners = vm.banners.map(bannerHtml).join("");
  const tiles = vm.tiles
    .map((tile) => {
      const age = Math.max(0, Math.round((nowMs - Date.parse(tile.at)) / 1000));
      const selected = tile.sensorId === vm.selectedSensor ? " selected" : "";
      return `<div class="tile-group${selected}" data-sensor="${esc(tile.sensorId)}">
        <h3>${esc(tile.sensorId)} <span class="age">${age}s ago</span></h3>
        <div class="tiles">
          <div class="tile"><span class="value">${fmt(tile.temperature, 1)}</span><span class="unit">°C</span></div>
          <div class="tile"><span class="value">${fmt(tile.humidity, 1)}</span><span class="unit">%RH</span></div>
          <div class="tile"><span class="value">${fmt(tile.illuminance, 0)}</span><span class="unit">lux</span></div>
        </div>
      </div>`;
    })
    .join("");
  const empty = vm.tiles.length
    ? ""
    : `<p class="empty">No sensor data yet. Feed the service or replay a dataset.</p>`;
  const chart = vm.selectedSensor
    ? `<section class="history">
         <h3>history - ${esc(vm.selectedSensor)}
           <select id="history-variable">
             <option value="temperature">temperature</option>
             <option value="humidity">humidity</option>
             <option value="illuminance">illuminance</option>
           </select>
         </h3>
         <canvas id="history-canvas" width="640" height="220"></canvas>
       </section>`
    : "";
  return `${offline}${banners}${empty}${tiles}${chart}`;
}

export function renderAddPlant(
  species: Species[],
  sensors: string[],
  error: string | null,
): string {
  const options = species
    .map(
      (s) =>
        `<li><button class="species" data-species="${esc(s.species_id)}">
           <strong>${esc(s.name)}</strong>
           <span class="hint">${esc(describeRange(s))}</span>
         </button></li>`,
    )
    .join("");
  const sensorOptions = sensors
    .map((s) => `<option value="${esc(s)}">${esc(s)}</option>`)
    .join("");
  return `
    <h2>Add plant</h2>
    <label>Sensor channel
      <select id="add-sensor">${sensorOptions}<option value="__custom">other...</option></select>
    </label>
    <input id="add-sensor-custom" placeholder="sensor id" class="hidden" />
    <label>Name <input id="add-name" placeholder="My plant" /></label>
    ${error ? `<div class="banner critical" id="add-error">${esc(error)}</div>` : ""}
    <p class="hint">Tap a species to add it.</p>
    <ul class="species-list">${options}</ul>`;
}

function describeRange(s: Species): string {
  const parts: string[] = [];
  for (const variable of ["temperature", "humidity"] as Variable[]) {
    const bands = s[variable];
    if (bands.low !== null && bands.high !== null) {
      parts.push(`${bands.low}-${bands.high} ${VARIABLE_UNITS[variable]}`);
    }
  }
  return parts.join(", ") || s.description;
}

export function renderPlants(state: AppState): string {
  const vm = viewModel(state);
  const banneredIds = new Set(vm.banners.map((b) => b.instanceId));
  const rows = vm.plants
    .map(
      (p) => `<li class="plant-row" data-id="${esc(p.id)}">
        <span>${banneredIds.has(p.id) ? "⚠️ " : ""}${esc(p.name)}
          <span class="hint">@ ${esc(p.sensor)}</span></span>
        <button class="remove" data-remove="${esc(p.id)}" title="remove">&minus;</button>
      </li>`,
    )
    .join("");
  return `
    <h2>Plants</h2>
    ${rows ? `<ul class="plant-list">${rows}</ul>` : `<p class="empty">No plants yet - add one.</p>`}`;
}

export function renderNav(active: Screen): string {
  const button = (screen: Screen, label: string) =>
    `<button class="nav${active === screen ? " active" : ""}" data-screen="${screen}">${label}</button>`;
  return (
    button("dashboard", "Dashboard") + button("add", "Add plant") + button("plants", "Plants")
  );
}
