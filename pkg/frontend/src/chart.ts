// History chart: a mean line inside a min-max band, drawn on a canvas.
// Scale math is pure and unit-tested; drawing is a thin projection.

import type { HistoryBucket, Variable } from "./types.js";

export interface Scale {
  xMin: number;
  xMax: number;
  yMin: number;
  yMax: number;
}

export interface SeriesPoint {
  x: number; // epoch ms (bucket start)
  mean: number;
  min: number;
  max: number;
}

export function buildSeries(
  buckets: HistoryBucket[],
  variable: Variable,
): SeriesPoint[] {
  const points: SeriesPoint[] = [];
  for (const bucket of buckets) {
    const stats = bucket[variable];
    if (stats.mean === null || stats.min === null || stats.max === null) continue;
    points.push({
      x: Date.parse(bucket.bucket_start),
      mean: stats.mean,
      min: stats.min,
      max: stats.max,
    });
  }
  return points;
}

export function computeScale(points: SeriesPoint[]): Scale | null {
  if (points.length === 0) return null;
  let yMin = Infinity;
  let yMax = -Infinity;
  for (const p of points) {
    if (p.min < yMin) yMin = p.min;
    if (p.max > yMax) yMax = p.max;
  }
  if (yMin === yMax) {
    yMin -= 1;
    yMax += 1;
  } else {
    const pad = (yMax - yMin) * 0.08;
    yMin -= pad;
    yMax += pad;
  }
  return { xMin: points[0].x, xMax: points[points.length - 1].x, yMin, yMax };
}

/** Round tick positions covering [min, max]: a 1/2/5 ladder. */
export function ticks(min: number, max: number, target = 5): number[] {
  if (!(max > min)) return [min];
  const rawStep = (max - min) / target;
  const power = Math.pow(10, Math.floor(Math.log10(rawStep)));
  let step = power;
  for (const m of [1, 2, 5, 10]) {
    if (power * m >= rawStep) {
      step = power * m;
      break;
    }
  }
  const out: number[] = [];
  for (let v = Math.ceil(min / step) * step; v <= max + step / 1e6; v += step) {
    out.push(Number(v.toFixed(10)));
  }
  return out;
}

export function drawHistory(
  ctx: CanvasRenderingContext2D,
  width: number,
  height: number,
  points: SeriesPoint[],
  unit: string,
): void {
  ctx.clearRect(0, 0, width, height);
  const scale = computeScale(points);
  if (scale === null || points.length === 0) {
    ctx.fillStyle = "#8a9580";
    ctx.font = "13px system-ui";
    ctx.fillText("no history yet", 16, height / 2);
    return;
  }
  const left = 44;
  const bottom = height - 20;
  const plotW = width - left - 8;
  const plotH = bottom - 8;
  const px = (x: number) =>
    scale.xMax === scale.xMin
      ? left + plotW / 2
      : left + ((x - scale.xMin) / (scale.xMax - scale.xMin)) * plotW;
  const py = (y: number) => bottom - ((y - scale.yMin) / (scale.yMax - scale.yMin)) * plotH;

  // horizontal grid + labels
  ctx.strokeStyle = "#e3e8dc";
  ctx.fillStyle = "#8a9580";
  ctx.font = "11px system-ui";
  for (const tick of ticks(scale.yMin, scale.yMax)) {
    const y = py(tick);
    ctx.beginPath();
    ctx.moveTo(left, y);
    ctx.lineTo(width - 8, y);
    ctx.stroke();
    ctx.fillText(String(tick), 4, y + 3);
  }
  ctx.fillText(unit, 4, 12);

  // min-max band
  ctx.beginPath();
  points.forEach((p, i) => {
    i === 0 ? ctx.moveTo(px(p.x), py(p.max)) : ctx.lineTo(px(p.x), py(p.max));
  });
  for (let i = points.length - 1; i >= 0; i--) {
    ctx.lineTo(px(points[i].x), py(points[i].min));
  }
  ctx.closePath();
  ctx.fillStyle = "rgba(74, 124, 89, 0.18)";
  ctx.fill();

  // mean line
  ctx.beginPath();
  points.forEach((p, i) => {
    i === 0 ? ctx.moveTo(px(p.x), py(p.mean)) : ctx.lineTo(px(p.x), py(p.mean));
  });
  ctx.strokeStyle = "#4a7c59";
  ctx.lineWidth = 1.8;
  ctx.stroke();
  ctx.lineWidth = 1;
}
