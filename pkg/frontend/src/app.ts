// Browser wiring: one session per submitted query, rendered into #app.

import { ApiClient } from "./api.js";
import {
  renderErrorBanner,
  renderQuestionCard,
  renderResultsTable,
  renderTracePanel,
  renderTranscript,
} from "./render.js";
import type { Question, QueryOutcome, TranscriptItem } from "./types.js";

interface UiState {
  sessionId: string | null;
  transcript: TranscriptItem[];
  pendingQuestion: Question | null;
  lastQuery: string;
}

const state: UiState = {
  sessionId: null,
  transcript: [],
  pendingQuestion: null,
  lastQuery: "",
};

const api = new ApiClient("");

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing element #${id}`);
  return node as T;
}

function paint(main: string): void {
  el("transcript").innerHTML = renderTranscript(state.transcript);
  el("main-panel").innerHTML = main;
  bindHandlers();
}

async function refreshTrace(): Promise<void> {
  if (!state.sessionId) return;
  try {
    const trace = await api.getTrace(state.sessionId);
    el("trace-panel").innerHTML = renderTracePanel(trace.events);
  } catch {
    el("trace-panel").innerHTML = "";
  }
}

function showOutcome(outcome: QueryOutcome): void {
  if (outcome.outcome === "question" && outcome.question) {
    state.pendingQuestion = outcome.question;
    state.transcript.push({ kind: "question", question: outcome.question });
    paint(renderQuestionCard(outcome.question));
  } else if (outcome.results) {
    state.pendingQuestion = null;
    state.transcript.push({
      kind: "summary",
      text: `${outcome.results.actual_rows} rows`,
    });
    paint(renderResultsTable(outcome.results, outcome.metrics));
  }
  void refreshTrace();
}

function showError(message: string): void {
  // transcript intentionally unchanged: the turn never happened
  paint(renderErrorBanner(message));
}

export async function startSessionAndSubmit(text: string): Promise<void> {
  state.lastQuery = text;
  try {
    const { id } = await api.createSession();
    state.sessionId = id;
    state.transcript.push({ kind: "user", text });
    const outcome = await api.submitQuery(id, text);
    showOutcome(outcome);
  } catch (exc) {
    showError(exc instanceof Error ? exc.message : String(exc));
  }
}

export async function answerQuestion(
  selected: number | string,
): Promise<void> {
  if (!state.sessionId || !state.pendingQuestion) {
    showError("session expired; submit the query again");
    return;
  }
  try {
    const outcome = await api.submitAnswer(
      state.sessionId,
      state.pendingQuestion.facet_id,
      selected,
    );
    showOutcome(outcome);
  } catch (exc) {
    showError(exc instanceof Error ? exc.message : String(exc));
  }
}

function bindHandlers(): void {
  document.querySelectorAll<HTMLButtonElement>(".option").forEach((btn) => {
    btn.onclick = () => void answerQuestion(Number(btn.dataset.option));
  });
  const free = document.querySelector<HTMLButtonElement>(".free-submit");
  if (free) {
    free.onclick = () => {
      const input = document.querySelector<HTMLInputElement>(".free-input");
      if (input && input.value.trim()) {
        void answerQuestion(input.value.trim());
      }
    };
  }
  const retry = document.querySelector<HTMLButtonElement>(".retry");
  if (retry) {
    retry.onclick = () => void startSessionAndSubmit(state.lastQuery);
  }
}

export function boot(): void {
  const form = el<HTMLFormElement>("query-form");
  form.onsubmit = (ev) => {
    ev.preventDefault();
    const input = el<HTMLInputElement>("query-input");
    const text = input.value.trim();
    if (text) {
      state.transcript = state.transcript.slice(-8);
      void startSessionAndSubmit(text);
    }
  };
  void api.getDatasets().then((ds) => {
    const names = [
      ...ds.tables.map((t) => t.name),
      ...ds.corpora.map((c) => `${c.name} (vectors)`),
    ];
    el("datasets").textContent = `datasets: ${names.join(", ")}`;
  });
}

if (typeof document !== "undefined" && document.getElementById("query-form")) {
  boot();
}
