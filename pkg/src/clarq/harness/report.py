"""Report emitters: per-entry CSV plus aggregate JSON, byte-deterministic."""

from __future__ import annotations

import csv
import json
from pathlib import Path

from .workload import EntryResult, RunReport

CSV_COLUMNS = (
    "entry_id", "backend", "vague", "asked", "answered", "facet_id",
    "facet_kind", "cost_baseline", "cost_clarified", "speedup",
    "baseline_latency", "clarified_latency",
    "recall_vague_ivf", "recall_clarified_ivf",
    "recall_vague_hnsw", "recall_clarified_hnsw",
    "failed", "error",
)


def _cell(value) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    return str(value)


def write_report(report: RunReport, outdir: str | Path) -> dict:
    """Write entries.csv and aggregates.json; returns the paths."""
    out = Path(outdir)
    out.mkdir(parents=True, exist_ok=True)
    entries_path = out / "entries.csv"
    agg_path = out / "aggregates.json"

    with open(entries_path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(CSV_COLUMNS)
        for e in report.entries:
            writer.writerow([_cell(getattr(e, col)) for col in CSV_COLUMNS])

    with open(agg_path, "w", encoding="utf-8") as fh:
        json.dump(report.aggregates(), fh, sort_keys=True, indent=2)
        fh.write("\n")

    return {"entries": str(entries_path), "aggregates": str(agg_path)}


def read_entries_csv(path: str | Path) -> list[EntryResult]:
    """Load a written entries.csv back into EntryResult rows."""
    def parse(col: str, raw: str):
        if raw == "":
            return None if col.startswith("recall") else ""
        if col in ("asked", "answered", "failed", "vague"):
            return raw == "true"
        if col in ("cost_baseline", "cost_clarified", "speedup",
                   "baseline_latency", "clarified_latency") or \
                col.startswith("recall"):
            return float(raw)
        return raw

    rows = []
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.DictReader(fh)
        for rec in reader:
            kwargs = {col: parse(col, rec[col]) for col in CSV_COLUMNS}
            rows.append(EntryResult(**kwargs))
    return rows
