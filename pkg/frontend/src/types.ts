// Payload shapes of the clarification service JSON API.

export interface Question {
  facet_id: string;
  text: string;
  options: string[];
}

export interface ResultsPayload {
  columns: string[];
  rows: unknown[][];
  actual_rows: number;
  measured_latency?: number;
}

export interface Metrics {
  asked?: boolean;
  reason?: string;
  speedup?: number;
  cost_speedup?: number;
  cost_baseline?: number;
  cost_clarified?: number;
  baseline_latency?: number;
  clarified_latency?: number;
  mode?: string;
  [key: string]: unknown;
}

export interface QueryOutcome {
  outcome: "question" | "results";
  question?: Question;
  results?: ResultsPayload;
  metrics?: Metrics;
  session_state: string;
}

export interface TraceEvent {
  timestamp: number;
  kind: string;
  payload: Record<string, unknown>;
}

export interface Trace {
  id: string;
  state: string;
  events: TraceEvent[];
}

export interface AmbiguitySignals {
  linguistic: number;
  grounding: number;
  cost_signal: number;
  anchors: [string, string][];
}

export interface FacetScore {
  facet_id: string;
  align: number;
  gain: number;
  cost: number;
  S: number;
  m: number;
}

export interface VocBreakdown {
  latency_saved: number;
  quality_lift: number;
  effort_term: number;
  total: number;
}

export interface CodBreakdown {
  interaction_seconds: number;
  llm_call_cost: number;
  total: number;
}

export interface Decision {
  ask: boolean;
  voc: VocBreakdown;
  cod: CodBreakdown;
  m: number;
  slack: number;
}

export interface DatasetListing {
  tables: { name: string; row_count: number; columns: unknown[] }[];
  corpora: { name: string; size: number; dim: number }[];
}

export type TranscriptItem =
  | { kind: "user"; text: string }
  | { kind: "question"; question: Question }
  | { kind: "summary"; text: string };
