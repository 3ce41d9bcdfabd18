/** Thin typed client for the service JSON API.

The fetch implementation is injectable so tests can script responses;
every non-2xx body is unwrapped from the server's single error envelope
into an ApiError carrying code, message and detail verbatim.
*/

import type {
  AlgorithmInfo,
  DatasetKind,
  DatasetRecord,
  HistogramSummary,
  JobRecord,
  JobResult,
} from "./types.js";

export type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

export class ApiError extends Error {
  constructor(
    readonly status: number,
    readonly code: string,
    message: string,
    readonly detail: unknown = null,
  ) {
    super(message);
    this.name = "ApiError";
  }
}

export class Api {
  private readonly fetchFn: FetchLike;

  constructor(fetchFn?: FetchLike, private readonly base: string = "") {
    this.fetchFn = fetchFn ?? ((input, init) => fetch(input, init));
  }

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    let response: Response;
    try {
      response = await this.fetchFn(this.base + path, init);
    } catch (err) {
      throw new ApiError(0, "network_error", `cannot reach server: ${String(err)}`);
    }
    if (response.status === 204) {
      return undefined as T;
    }
    let body: unknown = null;
    try {
      body = await response.json();
    } catch {
      body = null;
    }
    if (!response.ok) {
      const envelope = (body as { error?: { code?: string; message?: string; detail?: unknown } } | null)?.error;
      throw new ApiError(
        response.status,
        envelope?.code ?? "http_error",
        envelope?.message ?? `HTTP ${response.status}`,
        envelope?.detail ?? null,
      );
    }
    return body as T;
  }

  health(): Promise<{ status: string; version: string }> {
    return this.request("/api/health");
  }

  algorithms(): Promise<{ algorithms: AlgorithmInfo[] }> {
    return this.request("/api/algorithms");
  }

  datasets(): Promise<{ datasets: DatasetRecord[] }> {
    return this.request("/api/datasets");
  }

  uploadDataset(file: Blob, kind: DatasetKind, name: string): Promise<DatasetRecord> {
    const form = new FormData();
    form.append("file", file, `${name}.csv`);
    form.append("kind", kind);
    form.append("name", name);
    return this.request("/api/datasets", { method: "POST", body: form });
  }

  deleteDataset(id: string): Promise<void> {
    return this.request(`/api/datasets/${encodeURIComponent(id)}`, { method: "DELETE" });
  }

  histogram(
    datasetId: string,
    selector: string,
    bins: number,
    compareWith?: string | null,
    normalized?: boolean,
  ): Promise<HistogramSummary> {
    const query = new URLSearchParams({ selector, bins: String(bins) });
    if (compareWith) {
      query.set("compare_with", compareWith);
    }
    if (normalized) {
      query.set("normalized", "true");
    }
    return this.request(
      `/api/datasets/${encodeURIComponent(datasetId)}/histogram?${query.toString()}`,
    );
  }

  createJob(payload: Record<string, unknown>): Promise<JobRecord> {
    return this.request("/api/jobs", {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify(payload),
    });
  }

  jobs(): Promise<{ jobs: JobRecord[] }> {
    return this.request("/api/jobs");
  }

  job(id: string): Promise<JobRecord> {
    return this.request(`/api/jobs/${encodeURIComponent(id)}`);
  }

  jobResult(id: string): Promise<JobResult> {
    return this.request(`/api/jobs/${encodeURIComponent(id)}/result`);
  }
}
