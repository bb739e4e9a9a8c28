"""Workload runner: drives the full pipeline with a simulated user.

Relational entries record cost-model speedups (deterministic); vector
entries run against both index types and record recall@100 for the vague
and the clarified search. Wall-clock timings go to stdout only so report
files stay byte-identical across same-seed runs.
"""

from __future__ import annotations

import json
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

from .. import nlq
from ..config import RunConfig
from ..engine import execute, explain, plan
from ..session import Pipeline, Registry, SimulatedUser, to_logical
from ..vector.search import recall_at_k, search

SPEEDUP_BUCKETS = (
    ("<0.8", None, 0.8),
    ("0.8-1.0", 0.8, 1.0),
    ("1.0-1.2", 1.0, 1.2),
    ("1.2-1.6", 1.2, 1.6),
    ("1.6-2", 1.6, 2.0),
    ("2-4", 2.0, 4.0),
    (">4", 4.0, None),
)

HARNESS_KAPPA = 5000.0  # cost units per second pinned for deterministic reports


@dataclass
class WorkloadEntry:
    id: str
    nl_query: str
    backend: str  # relational | vector
    reference_query: str = ""
    truth_ids: list = field(default_factory=list)
    facet_annotations: dict = field(default_factory=dict)
    tags: dict = field(default_factory=dict)
    query_vector: Optional[list] = None
    k: Optional[int] = None

    def to_json(self) -> dict:
        return {
            "id": self.id,
            "nl_query": self.nl_query,
            "backend": self.backend,
            "reference_query": self.reference_query,
            "truth_ids": list(self.truth_ids),
            "facet_annotations": {
                k: (list(v) if isinstance(v, (tuple, list)) else v)
                for k, v in self.facet_annotations.items()
            },
            "tags": dict(self.tags),
            "query_vector": self.query_vector,
            "k": self.k,
        }

    @classmethod
    def from_json(cls, data: dict) -> "WorkloadEntry":
        return cls(
            id=data["id"],
            nl_query=data["nl_query"],
            backend=data["backend"],
            reference_query=data.get("reference_query", ""),
            truth_ids=list(data.get("truth_ids", [])),
            facet_annotations=dict(data.get("facet_annotations", {})),
            tags=dict(data.get("tags", {})),
            query_vector=data.get("query_vector"),
            k=data.get("k"),
        )


def save_workload(entries: list, path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump([e.to_json() for e in entries], fh, sort_keys=True, indent=2)
        fh.write("\n")


def load_workload(path: str | Path) -> list[WorkloadEntry]:
    with open(path, "r", encoding="utf-8") as fh:
        return [WorkloadEntry.from_json(d) for d in json.load(fh)]


@dataclass
class EntryResult:
    entry_id: str
    backend: str
    asked: bool = False
    answered: bool = False
    facet_id: str = ""
    facet_kind: str = ""
    cost_baseline: float = 0.0
    cost_clarified: float = 0.0
    speedup: float = 1.0  # cost-model units
    baseline_latency: float = 0.0  # cost / kappa, deterministic
    clarified_latency: float = 0.0
    wall_speedup: float = 1.0  # informative only, never written to files
    recall_vague_ivf: Optional[float] = None
    recall_clarified_ivf: Optional[float] = None
    recall_vague_hnsw: Optional[float] = None
    recall_clarified_hnsw: Optional[float] = None
    failed: bool = False
    error: str = ""
    vague: bool = False


@dataclass
class RunReport:
    entries: list
    kappa: float

    def ok_entries(self) -> list:
        return [e for e in self.entries if not e.failed]

    def aggregates(self) -> dict:
        ok = self.ok_entries()
        speedups = sorted(e.speedup for e in ok)
        histogram = {label: 0 for label, _, _ in SPEEDUP_BUCKETS}
        for s in speedups:
            histogram[_bucket(s)] += 1

        by_kind: dict[str, list[float]] = {}
        for e in ok:
            if e.asked and e.facet_kind:
                by_kind.setdefault(e.facet_kind, []).append(e.speedup)
        mean_by_kind = {
            k: sum(v) / len(v) for k, v in sorted(by_kind.items())
        }

        recall: dict[str, dict[str, float]] = {}
        for index in ("ivf", "hnsw"):
            vague = [getattr(e, f"recall_vague_{index}") for e in ok
                     if getattr(e, f"recall_vague_{index}") is not None]
            clar = [getattr(e, f"recall_clarified_{index}") for e in ok
                    if getattr(e, f"recall_clarified_{index}") is not None]
            if vague:
                recall[index] = {
                    "vague": sum(vague) / len(vague),
                    "clarified": sum(clar) / len(clar) if clar else 0.0,
                }

        return {
            "entry_count": len(ok),
            "failed_count": len(self.entries) - len(ok),
            "asked_count": sum(1 for e in ok if e.asked),
            "answered_count": sum(1 for e in ok if e.answered),
            "median_speedup": _median(speedups) if speedups else 0.0,
            "median_speedup_vague": _median(
                sorted(e.speedup for e in ok if e.vague)) if any(
                e.vague for e in ok) else 0.0,
            "speedup_histogram": histogram,
            "mean_speedup_by_facet_kind": mean_by_kind,
            "recall_at_100": recall,
            "kappa": self.kappa,
        }


def _median(sorted_values: list) -> float:
    n = len(sorted_values)
    if n == 0:
        return 0.0
    mid = n // 2
    if n % 2:
        return float(sorted_values[mid])
    return (sorted_values[mid - 1] + sorted_values[mid]) / 2.0


def _bucket(speedup: float) -> str:
    for label, lo, hi in SPEEDUP_BUCKETS:
        if (lo is None or speedup >= lo) and (hi is None or speedup < hi):
            return label
    return ">4"


def _multiset_overlap(rows_a: list, rows_b: list) -> float:
    ca, cb = Counter(rows_a), Counter(rows_b)
    return float(sum((ca & cb).values()))


def run_workload(registry: Registry, entries: list,
                 config: RunConfig, verbose: bool = False) -> RunReport:
    """Run every entry through the pipeline with the simulated user."""
    from dataclasses import replace as dc_replace

    if config.cqo.kappa is None:
        config = dc_replace(config, cqo=dc_replace(config.cqo,
                                                   kappa=HARNESS_KAPPA))
    pipeline = Pipeline(registry, config)
    results: list[EntryResult] = []
    for entry in sorted(entries, key=lambda e: e.id):
        res = EntryResult(entry_id=entry.id, backend=entry.backend,
                          vague=entry.tags.get("vague_kind", "none") != "none")
        try:
            if entry.backend == "relational":
                _run_relational(pipeline, entry, res)
            elif entry.backend == "vector":
                _run_vector(pipeline, entry, res)
            else:
                raise ValueError(f"unknown backend {entry.backend!r}")
        except Exception as exc:  # entry failure must not kill the run
            res.failed = True
            res.error = f"{type(exc).__name__}: {exc}"
        if verbose:
            print(f"[{entry.id}] asked={res.asked} speedup={res.speedup:.3f} "
                  f"wall={res.wall_speedup:.3f} failed={res.failed}{res.error}")
        results.append(res)
    return RunReport(entries=results, kappa=pipeline.kappa)


def _run_relational(pipeline: Pipeline, entry: WorkloadEntry,
                    res: EntryResult) -> None:
    catalog = pipeline.registry.catalog
    reference_rows = None
    if entry.reference_query:
        ref_draft = nlq.parse(entry.reference_query, catalog,
                              corpora=pipeline.registry.corpus_names(),
                              vague_map=pipeline.config.nlq.vague_map,
                              lexicon=pipeline.config.nlq.lexicon)
        ref_plan = plan(to_logical(ref_draft, catalog), catalog)
        reference_rows = execute(ref_plan, catalog).rows

    session = pipeline.new_session()
    out = pipeline.submit_query(session, entry.nl_query)
    res.cost_baseline = session.baseline_explain.total_cost
    res.baseline_latency = res.cost_baseline / pipeline.kappa

    if out["outcome"] != "question":
        res.cost_clarified = res.cost_baseline
        res.clarified_latency = res.baseline_latency
        res.speedup = 1.0
        return

    res.asked = True
    facet = session.facet
    res.facet_id = facet.id
    res.facet_kind = facet.kind

    def evaluate_option(i: int) -> float:
        if reference_rows is None:
            return 0.0
        trial = nlq.apply_answer(session.draft, facet,
                                 nlq.Answer(facet_id=facet.id, selected=i))
        rows = execute(plan(to_logical(trial, catalog), catalog), catalog).rows
        return _multiset_overlap(rows, reference_rows)

    user = SimulatedUser(annotations=entry.facet_annotations,
                         evaluate_option=evaluate_option
                         if reference_rows is not None else None)
    answer = user.answer(session.question, facet)
    if answer is None:
        pipeline.abandon(session)
        res.cost_clarified = res.cost_baseline
        res.clarified_latency = res.baseline_latency
        res.speedup = 1.0
        return

    out2 = pipeline.submit_answer(session, answer)
    res.answered = True
    m = out2["metrics"]
    res.cost_clarified = m["cost_clarified"]
    res.speedup = m["cost_speedup"]
    res.baseline_latency = m["estimated_baseline_latency"]
    res.clarified_latency = m["estimated_clarified_latency"]
    if m["mode"] == "measured" and m["clarified_latency"] > 0:
        res.wall_speedup = m["baseline_latency"] / m["clarified_latency"]


def _run_vector(pipeline: Pipeline, entry: WorkloadEntry,
                res: EntryResult) -> None:
    if entry.query_vector is None:
        raise ValueError(f"vector entry {entry.id} needs a query_vector")
    if not entry.truth_ids:
        raise ValueError(f"vector entry {entry.id} needs truth_ids")
    bundle = pipeline.registry.corpora[_vector_target(pipeline, entry)]
    truth = entry.truth_ids
    k = entry.k or 100
    qv = np.asarray(entry.query_vector, dtype=np.float64)

    primary_recorded = False
    for index_kind in ("ivf", "hnsw"):
        if index_kind == "hnsw" and bundle.hnsw is None:
            continue
        session = pipeline.new_session()
        out = pipeline.submit_query(session, entry.nl_query, query_vector=qv,
                                    index_kind=index_kind)
        vague_recall = recall_at_k(session.baseline_hits, truth, k)
        clarified_recall = vague_recall
        asked = out["outcome"] == "question"
        answered = False

        if asked:
            facet = session.facet
            index = bundle.ivf if index_kind == "ivf" else bundle.hnsw

            def evaluate_option(i: int) -> float:
                kw = facet.candidates[i]
                hits, _ = search(index, qv, k, keyword_filter=kw,
                                 nprobe=pipeline.config.vector.nprobe,
                                 ef_search=pipeline.config.vector.ef_search)
                return float(len({h.id for h in hits} & set(truth)))

            user = SimulatedUser(annotations=entry.facet_annotations,
                                 evaluate_option=evaluate_option)
            answer = user.answer(session.question, facet)
            if answer is None:
                pipeline.abandon(session)
            else:
                out2 = pipeline.submit_answer(session, answer)
                answered = True
                ids = [row[0] for row in out2["results"]["rows"]]
                clarified_recall = (len(set(ids[:k]) & set(truth))
                                    / min(k, len(truth)))

        setattr(res, f"recall_vague_{index_kind}", vague_recall)
        setattr(res, f"recall_clarified_{index_kind}", clarified_recall)

        if not primary_recorded:  # IVF run (or first available) is primary
            res.asked = asked
            res.answered = answered
            if session.facet is not None:
                res.facet_id = session.facet.id
                res.facet_kind = session.facet.kind
            res.cost_baseline = float(session.baseline_stats.candidates_scanned)
            res.baseline_latency = res.cost_baseline / pipeline.kappa
            if answered:
                m = out2["metrics"]
                res.cost_clarified = m["cost_clarified"]
                res.speedup = m["cost_speedup"]
                res.clarified_latency = m["estimated_clarified_latency"]
            else:
                res.cost_clarified = res.cost_baseline
                res.clarified_latency = res.baseline_latency
                res.speedup = 1.0
            primary_recorded = True


def _vector_target(pipeline: Pipeline, entry: WorkloadEntry) -> str:
    draft = nlq.parse(entry.nl_query, pipeline.registry.catalog
                      if pipeline.registry.catalog.tables else None,
                      corpora=pipeline.registry.corpus_names(),
                      vague_map=pipeline.config.nlq.vague_map,
                      lexicon=pipeline.config.nlq.lexicon)
    return draft.target
