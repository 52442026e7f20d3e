import { describe, expect, it } from "vitest";

import { ApiClient, ApiError, SubmissionGuard } from "../src/api.js";

function jsonResponse(status: number, body: unknown): Response {
  return new Response(JSON.stringify(body), {
    status,
    headers: { "Content-Type": "application/json" },
  });
}

describe("ApiClient", () => {
  it("parses live snapshots", async () => {
    const api = new ApiClient("", async () =>
      jsonResponse(200, { at: "t", sensors: [], plants: [] }),
    );
    const live = await api.getLive();
    expect(live.sensors).toEqual([]);
  });

  it("surfaces error details with status", async () => {
    const api = new ApiClient("", async () =>
      jsonResponse(404, { detail: "unknown species 'orchid'" }),
    );
    await expect(
      api.addPlant({
        species_id: "orchid",
        sensor_id: "s",
        display_name: "x",
        idempotency_key: "k",
      }),
    ).rejects.toMatchObject({ status: 404, message: "unknown species 'orchid'" });
  });

  it("treats DELETE 404 as already removed", async () => {
    const api = new ApiClient("", async () => jsonResponse(404, { detail: "gone" }));
    await expect(api.removePlant("missing")).resolves.toBeUndefined();
  });

  it("propagates other DELETE failures", async () => {
    const api = new ApiClient("", async () => jsonResponse(500, { detail: "boom" }));
    await expect(api.removePlant("x")).rejects.toBeInstanceOf(ApiError);
  });

  it("sends the idempotency key in the body", async () => {
    let sent: unknown = null;
    const api = new ApiClient("", async (_url, init) => {
      sent = JSON.parse(String(init?.body));
      return jsonResponse(201, { plant: { instance_id: "i" }, created: true });
    });
    await api.addPlant({
      species_id: "peace_lily",
      sensor_id: "window",
      display_name: "Lily",
      idempotency_key: "tap-key",
    });
    expect(sent).toMatchObject({ idempotency_key: "tap-key" });
  });

  it("encodes history query parameters", async () => {
    let url = "";
    const api = new ApiClient("", async (input) => {
      url = input;
      return jsonResponse(200, { sensor_id: "s", buckets: [] });
    });
    await api.getHistory("win dow", "2018-11-24T00:00:00Z", "2018-11-25T00:00:00Z", 600);
    expect(url).toContain("sensor=win+dow");
    expect(url).toContain("bucket=600");
  });
});

describe("SubmissionGuard", () => {
  it("reuses one key across rapid taps until settled", () => {
    let n = 0;
    const guard = new SubmissionGuard(() => `key-${n++}`);
    const first = guard.begin();
    const second = guard.begin(); // double tap while in flight
    expect(second).toBe(first);
    expect(guard.inFlight).toBe(true);
    guard.settle();
    expect(guard.begin()).toBe("key-1");
  });
});
