// Documented display formatting. The UI never recomputes scores; it only
// formats what the API returned:
//   - speedups: 2 decimals, "x" suffix
//   - scores and signals (align/gain/cost/S/m, ambiguity): 3 decimals
//   - seconds-equivalents (VoC/CoD parts): 2 decimals, "s" suffix

export function formatSpeedup(value: number): string {
  return `${value.toFixed(2)}x`;
}

export function formatScore(value: number): string {
  return value.toFixed(3);
}

export function formatSeconds(value: number): string {
  return `${value.toFixed(2)}s`;
}

export function formatCell(value: unknown): string {
  if (value === null || value === undefined) return "";
  if (typeof value === "number" && !Number.isInteger(value)) {
    return value.toFixed(3);
  }
  if (Array.isArray(value)) return value.join(", ");
  return String(value);
}

export function escapeHtml(text: string): string {
  return text
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;")
    .replace(/'/g, "&#39;");
}
