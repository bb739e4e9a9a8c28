// Thin fetch client for the clarification service. The UI talks to the
// documented JSON API and nothing else.

import type { DatasetListing, QueryOutcome, Trace } from "./types.js";

export type FetchLike = (url: string, init?: RequestInit) => Promise<Response>;

export class ApiError extends Error {
  constructor(public status: number, detail: string) {
    super(detail);
  }
}

export class ApiClient {
  constructor(
    private baseUrl: string = "",
    private fetchImpl: FetchLike = (...args) => fetch(...args),
  ) {}

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    const resp = await this.fetchImpl(`${this.baseUrl}${path}`, init);
    let body: unknown;
    try {
      body = await resp.json();
    } catch {
      body = {};
    }
    if (!resp.ok) {
      const detail =
        (body as { detail?: string }).detail ?? `HTTP ${resp.status}`;
      throw new ApiError(resp.status, detail);
    }
    return body as T;
  }

  createSession(): Promise<{ id: string }> {
    return this.request("/sessions", { method: "POST" });
  }

  submitQuery(sessionId: string, text: string): Promise<QueryOutcome> {
    return this.request(`/sessions/${sessionId}/query`, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify({ text }),
    });
  }

  submitAnswer(
    sessionId: string,
    facetId: string,
    selected: number | string,
  ): Promise<QueryOutcome> {
    return this.request(`/sessions/${sessionId}/answer`, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify({ facet_id: facetId, selected }),
    });
  }

  getTrace(sessionId: string): Promise<Trace> {
    return this.request(`/sessions/${sessionId}/trace`);
  }

  getDatasets(): Promise<DatasetListing> {
    return this.request("/datasets");
  }
}
