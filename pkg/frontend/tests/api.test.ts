// API client exercised offline against the recorded fixture responses.

import { readFileSync } from "fs";
import { join, dirname } from "path";
import { fileURLToPath } from "url";
import { describe, expect, it } from "vitest";

import { ApiClient, ApiError } from "../src/api.js";

const here = dirname(fileURLToPath(import.meta.url));
const fixture = JSON.parse(
  readFileSync(join(here, "..", "fixtures", "session.json"), "utf-8"),
);

function fakeFetch(routes: Record<string, { status?: number; body: unknown }>) {
  const calls: string[] = [];
  const impl = async (url: string, init?: RequestInit) => {
    const key = `${init?.method ?? "GET"} ${url}`;
    calls.push(key);
    const route = routes[key];
    if (!route) throw new Error(`unrouted: ${key}`);
    return new Response(JSON.stringify(route.body), {
      status: route.status ?? 200,
      headers: { "Content-Type": "application/json" },
    });
  };
  return { impl, calls };
}

describe("ApiClient against the fixture", () => {
  const sid = fixture.clarified_session.session_id;

  it("runs the full clarified exchange", async () => {
    const { impl, calls } = fakeFetch({
      "POST /sessions": { body: { id: sid } },
      [`POST /sessions/${sid}/query`]: {
        body: fixture.clarified_session.query_response,
      },
      [`POST /sessions/${sid}/answer`]: {
        body: fixture.clarified_session.answer_response,
      },
      [`GET /sessions/${sid}/trace`]: { body: fixture.clarified_session.trace },
    });
    const api = new ApiClient("", impl);
    const { id } = await api.createSession();
    const outcome = await api.submitQuery(
      id,
      fixture.clarified_session.query_text,
    );
    expect(outcome.outcome).toBe("question");
    const answer = await api.submitAnswer(
      id,
      outcome.question!.facet_id,
      0,
    );
    expect(answer.outcome).toBe("results");
    const trace = await api.getTrace(id);
    expect(trace.events.map((e) => e.kind)).toContain("decision");
    expect(calls.length).toBe(4);
  });

  it("surfaces API errors with their detail", async () => {
    const { impl } = fakeFetch({
      "POST /sessions": { body: { id: sid } },
      [`POST /sessions/${sid}/query`]: {
        status: 422,
        body: { detail: "no recognizable target" },
      },
    });
    const api = new ApiClient("", impl);
    const { id } = await api.createSession();
    await expect(api.submitQuery(id, "show gizmos")).rejects.toThrowError(
      ApiError,
    );
    await expect(api.submitQuery(id, "show gizmos")).rejects.toThrow(
      /recognizable target/,
    );
  });

  it("lists datasets", async () => {
    const { impl } = fakeFetch({
      "GET /datasets": { body: fixture.datasets },
    });
    const api = new ApiClient("", impl);
    const ds = await api.getDatasets();
    expect(ds.tables.map((t) => t.name)).toContain("movies");
    expect(ds.corpora[0].name).toBe("papers");
  });
});
