// Pure HTML-string renderers. Every number shown is a formatted copy of an
// API value; nothing is recomputed client-side, which keeps the trace panel
// a faithful view of the engine's own reasoning.

import {
  escapeHtml,
  formatCell,
  formatScore,
  formatSeconds,
  formatSpeedup,
} from "./format.js";
import type {
  AmbiguitySignals,
  Decision,
  FacetScore,
  Metrics,
  Question,
  ResultsPayload,
  TraceEvent,
  TranscriptItem,
} from "./types.js";

const MAX_ROWS = 50;

export function renderTranscript(items: TranscriptItem[]): string {
  const parts = items.map((item) => {
    if (item.kind === "user") {
      return `<div class="turn user">${escapeHtml(item.text)}</div>`;
    }
    if (item.kind === "question") {
      return `<div class="turn system">${escapeHtml(item.question.text)}</div>`;
    }
    return `<div class="turn summary">${escapeHtml(item.text)}</div>`;
  });
  return `<div class="transcript">${parts.join("")}</div>`;
}

export function renderQuestionCard(question: Question): string {
  const buttons = question.options
    .map(
      (opt, i) =>
        `<button class="option" data-option="${i}">${escapeHtml(opt)}</button>`,
    )
    .join("");
  return (
    `<div class="question-card" data-facet="${escapeHtml(question.facet_id)}">` +
    `<p class="question-text">${escapeHtml(question.text)}</p>` +
    `<div class="options">${buttons}</div>` +
    `<div class="free-answer">` +
    `<input type="text" class="free-input" placeholder="Or type your own answer" />` +
    `<button class="free-submit">Answer</button>` +
    `</div></div>`
  );
}

export function renderSpeedupBadge(metrics: Metrics): string {
  if (typeof metrics.speedup !== "number") return "";
  return `<span class="speedup-badge">${formatSpeedup(metrics.speedup)}</span>`;
}

export function renderResultsTable(
  results: ResultsPayload,
  metrics?: Metrics,
): string {
  const header = results.columns
    .map((c) => `<th>${escapeHtml(c)}</th>`)
    .join("");
  const rows = results.rows
    .slice(0, MAX_ROWS)
    .map(
      (row) =>
        `<tr>${row.map((v) => `<td>${escapeHtml(formatCell(v))}</td>`).join("")}</tr>`,
    )
    .join("");
  const badge = metrics ? renderSpeedupBadge(metrics) : "";
  const note =
    results.rows.length > MAX_ROWS
      ? `<p class="note">showing ${MAX_ROWS} of ${results.actual_rows} rows</p>`
      : "";
  return (
    `<div class="results">${badge}` +
    `<p class="row-count">${results.actual_rows} rows</p>` +
    `<table><thead><tr>${header}</tr></thead><tbody>${rows}</tbody></table>` +
    `${note}</div>`
  );
}

export function findEvent(
  events: TraceEvent[],
  kind: string,
): TraceEvent | undefined {
  return events.find((e) => e.kind === kind);
}

function skipReason(decision: Decision): string {
  if (decision.m < 0.5) return "skipped: low confidence (m &lt; 0.5)";
  return "skipped: VoC &le; CoD (1 + slack)";
}

export function renderTracePanel(events: TraceEvent[]): string {
  const ambiguity = findEvent(events, "ambiguity");
  const facets = findEvent(events, "facets");
  const decision = findEvent(events, "decision");
  if (!ambiguity && !facets && !decision) return "";

  const sections: string[] = [];

  if (ambiguity) {
    const signals = ambiguity.payload.signals as unknown as AmbiguitySignals;
    const combined = ambiguity.payload.combined as number;
    sections.push(
      `<section class="ambiguity"><h3>Ambiguity</h3><ul>` +
        `<li>linguistic: <b>${formatScore(signals.linguistic)}</b></li>` +
        `<li>grounding: <b>${formatScore(signals.grounding)}</b></li>` +
        `<li>cost signal: <b>${formatScore(signals.cost_signal)}</b></li>` +
        `<li>combined: <b>${formatScore(combined)}</b></li>` +
        `</ul></section>`,
    );
  }

  if (facets) {
    const scores = (facets.payload.scores as unknown as FacetScore[])
      .slice()
      .sort((a, b) => b.S - a.S);
    const bars = scores
      .map((s) => {
        const width = Math.max(0, Math.min(100, Math.round(s.m * 100)));
        return (
          `<div class="facet-row" data-facet="${escapeHtml(s.facet_id)}">` +
          `<span class="facet-name">${escapeHtml(s.facet_id)}</span>` +
          `<span class="facet-terms">align ${formatScore(s.align)} | ` +
          `gain ${formatScore(s.gain)} | cost ${formatScore(s.cost)} | ` +
          `S ${formatScore(s.S)} | m ${formatScore(s.m)}</span>` +
          `<div class="bar"><div class="fill" style="width:${width}%"></div></div>` +
          `</div>`
        );
      })
      .join("");
    sections.push(
      `<section class="facets"><h3>Facets</h3>${bars}</section>`,
    );
  }

  if (decision) {
    const d = decision.payload.decision as unknown as Decision;
    const verdict = d.ask
      ? `<span class="verdict ask">asked</span>`
      : `<span class="verdict skip">${skipReason(d)}</span>`;
    sections.push(
      `<section class="gate"><h3>Gate</h3>` +
        `<ul>` +
        `<li>VoC total: <b>${formatSeconds(d.voc.total)}</b>` +
        ` (latency ${formatSeconds(d.voc.latency_saved)},` +
        ` quality ${formatSeconds(d.voc.quality_lift)},` +
        ` effort ${formatSeconds(d.voc.effort_term)})</li>` +
        `<li>CoD total: <b>${formatSeconds(d.cod.total)}</b></li>` +
        `<li>m: <b>${formatScore(d.m)}</b>, slack: ${d.slack}</li>` +
        `</ul>${verdict}</section>`,
    );
  }

  return `<div class="trace-panel">${sections.join("")}</div>`;
}

export function renderErrorBanner(message: string): string {
  return (
    `<div class="error-banner">` +
    `<span>${escapeHtml(message)}</span>` +
    `<button class="retry">Retry</button></div>`
  );
}
