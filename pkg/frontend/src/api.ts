// Typed client for the /api/v1 endpoints.  fetch is injectable for
// tests; the SSE subscription factory likewise.

import type {
  AlertEvent,
  HistoryResponse,
  LiveSnapshot,
  Plant,
  Species,
} from "./types.js";

export class ApiError extends Error {
  constructor(
    public status: number,
    detail: string,
  ) {
    super(detail);
  }
}

type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

export class ApiClient {
  constructor(
    private base: string = "",
    private fetchFn: FetchLike = (input, init) => fetch(input, init),
  ) {}

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    const response = await this.fetchFn(this.base + path, init);
    if (!response.ok) {
      let detail = `HTTP ${response.status}`;
      try {
        const body = await response.json();
        if (body && typeof body.detail === "string") detail = body.detail;
      } catch {
        // non-JSON error body; keep the status text
      }
      throw new ApiError(response.status, detail);
    }
    return (await response.json()) as T;
  }

  getLive(): Promise<LiveSnapshot> {
    return this.request("/api/v1/live");
  }

  async getSpecies(): Promise<Species[]> {
    const body = await this.request<{ species: Species[] }>("/api/v1/species");
    return body.species;
  }

  async getPlants(): Promise<Plant[]> {
    const body = await this.request<{ plants: Plant[] }>("/api/v1/plants");
    return body.plants;
  }

  async getAlerts(sinceIso?: string): Promise<AlertEvent[]> {
    const query = sinceIso ? `?since=${encodeURIComponent(sinceIso)}` : "";
    const body = await this.request<{ events: AlertEvent[] }>(
      `/api/v1/alerts${query}`,
    );
    return body.events;
  }

  getHistory(
    sensor: string,
    fromIso: string,
    toIso: string,
    bucketSeconds: number,
  ): Promise<HistoryResponse> {
    const params = new URLSearchParams({
      sensor,
      from: fromIso,
      to: toIso,
      bucket: String(bucketSeconds),
    });
    return this.request(`/api/v1/history?${params}`);
  }

  async addPlant(req: {
    species_id: string;
    sensor_id: string;
    display_name: string;
    idempotency_key: string;
  }): Promise<{ plant: Plant; created: boolean }> {
    return this.request("/api/v1/plants", {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify(req),
    });
  }

  /** DELETE; a 404 is treated as already-removed. */
  async removePlant(instanceId: string): Promise<void> {
    try {
      await this.request(`/api/v1/plants/${encodeURIComponent(instanceId)}`, {
        method: "DELETE",
      });
    } catch (err) {
      if (err instanceof ApiError && err.status === 404) return;
      throw err;
    }
  }
}

/** One idempotency key per submission attempt: rapid re-clicks while a
 * request is in flight reuse the same key, so the server creates one
 * plant no matter how eagerly the button is tapped. */
export class SubmissionGuard {
  private key: string | null = null;

  constructor(private newKey: () => string = randomKey) {}

  begin(): string {
    if (this.key === null) this.key = this.newKey();
    return this.key;
  }

  settle(): void {
    this.key = null;
  }

  get inFlight(): boolean {
    return this.key !== null;
  }
}

function randomKey(): string {
  const bytes = new Uint8Array(12);
  crypto.getRandomValues(bytes);
  return Array.from(bytes, (b) => b.toString(16).padStart(2, "0")).join("");
}
