import { describe, expect, it } from "vitest";

import { buildSeries, computeScale, ticks } from "../src/chart.js";
import type { HistoryBucket } from "../src/types.js";

function bucket(start: string, mean: number | null, min: number | null, max: number | null): HistoryBucket {
  const stats = (m: number | null, lo: number | null, hi: number | null) => ({
    count: m === null ? 0 : 3,
    mean: m,
    min: lo,
    max: hi,
  });
  return {
    bucket_start: start,
    sample_count: 3,
    temperature: stats(mean, min, max),
    humidity: stats(null, null, null),
    illuminance: stats(null, null, null),
  };
}

describe("buildSeries", () => {
  it("keeps only buckets where the variable has data", () => {
    const series = buildSeries(
      [
        bucket("2018-11-24T10:00:00Z", 17.5, 17.0, 18.0),
        bucket("2018-11-24T10:10:00Z", null, null, null),
        bucket("2018-11-24T10:20:00Z", 17.8, 17.2, 18.1),
      ],
      "temperature",
    );
    expect(series).toHaveLength(2);
    expect(series[0].x).toBe(Date.parse("2018-11-24T10:00:00Z"));
    expect(series[1].mean).toBeCloseTo(17.8);
  });

  it("is empty for a variable with no samples", () => {
    expect(
      buildSeries([bucket("2018-11-24T10:00:00Z", 17.5, 17.0, 18.0)], "humidity"),
    ).toHaveLength(0);
  });
});

describe("computeScale", () => {
  it("spans the min-max envelope with padding", () => {
    const scale = computeScale(
      buildSeries([bucket("2018-11-24T10:00:00Z", 17.5, 17.0, 18.0)], "temperature"),
    );
    expect(scale).not.toBeNull();
    expect(scale!.yMin).toBeLessThan(17.0);
    expect(scale!.yMax).toBeGreaterThan(18.0);
  });

  it("widens a flat series instead of collapsing", () => {
    const scale = computeScale([{ x: 0, mean: 5, min: 5, max: 5 }]);
    expect(scale!.yMax - scale!.yMin).toBeGreaterThan(0);
  });

  it("is null without points", () => {
    expect(computeScale([])).toBeNull();
  });
});

describe("ticks", () => {
  it("produces round steps covering the range", () => {
    const t = ticks(0, 100, 5);
    expect(t[0]).toBeGreaterThanOrEqual(0);
    expect(t[t.length - 1]).toBeLessThanOrEqual(100);
    const steps = new Set(t.slice(1).map((v, i) => +(v - t[i]).toFixed(9)));
    expect(steps.size).toBe(1); // uniform spacing
  });

  it("handles tiny ranges", () => {
    const t = ticks(17.2, 17.9);
    expect(t.length).toBeGreaterThan(1);
    for (const v of t) {
      expect(v).toBeGreaterThanOrEqual(17.2);
      expect(v).toBeLessThanOrEqual(17.9);
    }
  });

  it("degrades to a single tick for an empty range", () => {
    expect(ticks(5, 5)).toEqual([5]);
  });
});
