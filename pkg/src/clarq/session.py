"""Pipeline orchestration: parse, score, gate, ask or execute, inject, run.

A session carries one query through the loop and allows at most one
clarification round. Every intermediate artifact (parsed draft, ambiguity
signals, facet scores, gate decision, question, answer, execution) lands in
an ordered trace that the HTTP API and the UI expose verbatim.
"""

from __future__ import annotations

import json
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Optional

import numpy as np

from . import ambiguity as amb
from . import cqo, miu, nlq
from .catalog import Catalog
from .config import RunConfig, default_config
from .engine import (
    ExplainReport,
    LogicalQuery,
    calibrate_kappa,
    execute,
    explain,
    plan,
)
from .llm import LlmAdapter, llm_linguistic_score, llm_rephrase
from .vector.corpus import EmbeddingCorpus
from .vector.hnsw import HnswIndex, build_hnsw
from .vector.ivf import IvfIndex, build_ivf
from .vector.search import SearchStats, search

STATE_RECEIVED = "received"
STATE_ANALYZED = "analyzed"
STATE_AWAITING = "awaiting_answer"
STATE_EXECUTED = "executed"
STATE_DONE = "done"


class SessionError(ValueError):
    """Raised on out-of-order session operations."""


@dataclass
class CorpusBundle:
    name: str
    corpus: EmbeddingCorpus
    ivf: IvfIndex
    hnsw: Optional[HnswIndex] = None


class Registry:
    """Datasets the pipeline can serve: catalog tables plus vector corpora."""

    def __init__(self, catalog: Optional[Catalog] = None) -> None:
        self.catalog = catalog or Catalog()
        self.corpora: dict[str, CorpusBundle] = {}

    def add_corpus(self, name: str, corpus: EmbeddingCorpus, cfg: RunConfig,
                   with_hnsw: bool = True) -> CorpusBundle:
        nlist = min(cfg.vector.nlist, len(corpus))
        ivf = build_ivf(corpus, nlist=nlist, seed=cfg.vector.seed)
        hnsw = None
        if with_hnsw:
            hnsw = build_hnsw(corpus, M=cfg.vector.M,
                              ef_construction=cfg.vector.ef_construction,
                              seed=cfg.vector.seed)
        bundle = CorpusBundle(name=name, corpus=corpus, ivf=ivf, hnsw=hnsw)
        self.corpora[name] = bundle
        return bundle

    def corpus_names(self) -> list[str]:
        return sorted(self.corpora)

    def datasets_json(self) -> dict:
        tables = []
        for name in self.catalog.table_names():
            t = self.catalog.table(name)
            tables.append({
                "name": name,
                "row_count": t.row_count,
                "columns": [{"name": c, "kind": k} for c, k in t.schema.columns],
            })
        corpora = [
            {"name": b.name, "size": len(b.corpus), "dim": b.corpus.dim}
            for b in (self.corpora[n] for n in self.corpus_names())
        ]
        return {"tables": tables, "corpora": corpora}


@dataclass
class TraceEvent:
    timestamp: float
    kind: str  # parsed | ambiguity | facets | decision | question | answer | executed
    payload: dict

    def to_json(self) -> dict:
        return {"timestamp": self.timestamp, "kind": self.kind,
                "payload": self.payload}


@dataclass
class Session:
    id: str
    state: str = STATE_RECEIVED
    draft: Optional[nlq.DraftQuery] = None
    logical: Optional[LogicalQuery] = None
    facet: Optional[miu.Facet] = None
    facet_score: Optional[miu.FacetScore] = None
    question: Optional[nlq.ClarificationQuestion] = None
    decision: Optional[cqo.ClarificationDecision] = None
    baseline_explain: Optional[ExplainReport] = None
    baseline_stats: Optional[SearchStats] = None
    baseline_hits: Optional[list] = None
    query_vector: Optional[np.ndarray] = None
    index_kind: str = "ivf"
    k: int = 10
    trace: list = field(default_factory=list)


def to_logical(draft: nlq.DraftQuery, catalog: Catalog) -> LogicalQuery:
    """Draft to logical query; multi-table drafts join naturally on shared
    column names."""
    tables = draft.all_tables()
    joins: list[tuple[str, str]] = []
    for i, a in enumerate(tables):
        for b in tables[i + 1:]:
            cols_a = set(catalog.table(a).schema.column_names())
            cols_b = set(catalog.table(b).schema.column_names())
            for shared in sorted(cols_a & cols_b):
                joins.append((f"{a}.{shared}", f"{b}.{shared}"))
    projections = ("count(*)",) if draft.count_only else draft.projections
    return LogicalQuery(
        tables=tables,
        projections=projections,
        predicates=draft.predicates,
        joins=tuple(joins),
        order_by=draft.order_by,
        limit=draft.limit,
    )


class Pipeline:
    """Wires the clarification loop over a registry of datasets."""

    def __init__(
        self,
        registry: Registry,
        config: Optional[RunConfig] = None,
        llm_adapter: Optional[LlmAdapter] = None,
    ) -> None:
        self.registry = registry
        self.config = config or default_config()
        self.llm = llm_adapter if self.config.llm_enabled else None
        self._kappa: Optional[float] = self.config.cqo.kappa
        self._counter = 0
        self.sessions: dict[str, Session] = {}
        self._trace_dir = Path(self.config.trace_dir) if self.config.trace_dir else None
        if self._trace_dir:
            self._trace_dir.mkdir(parents=True, exist_ok=True)

    # -- session management -------------------------------------------------

    def new_session(self) -> Session:
        self._counter += 1
        session = Session(id=f"s{self._counter:06d}")
        self.sessions[session.id] = session
        return session

    def get_session(self, session_id: str) -> Session:
        try:
            return self.sessions[session_id]
        except KeyError:
            raise SessionError(f"unknown session {session_id!r}") from None

    @property
    def kappa(self) -> float:
        if self._kappa is None:
            self._kappa = calibrate_kappa()
        return self._kappa

    def _trace(self, session: Session, kind: str, payload: dict) -> None:
        event = TraceEvent(timestamp=time.time(), kind=kind, payload=payload)
        session.trace.append(event)
        if self._trace_dir:
            path = self._trace_dir / f"{session.id}.jsonl"
            with open(path, "a", encoding="utf-8") as fh:
                fh.write(json.dumps(event.to_json(), sort_keys=True) + "\n")

    # -- linguistic scorer (heuristic default, LLM optional) ----------------

    def _linguistic(self, text: str) -> float:
        if self.llm is not None:
            v = llm_linguistic_score(self.llm, text)
            if v is not None:
                return v
        return amb.score_linguistic(text, self.config.nlq.lexicon)

    # -- query submission ----------------------------------------------------

    def submit_query(
        self,
        session: Session,
        text: str,
        query_vector: Optional[np.ndarray] = None,
        index_kind: str = "ivf",
    ) -> dict:
        if session.state != STATE_RECEIVED:
            raise SessionError(f"session {session.id} already processed a query")
        draft = nlq.parse(
            text,
            self.registry.catalog if self.registry.catalog.tables else None,
            corpora=self.registry.corpus_names(),
            vague_map=self.config.nlq.vague_map,
            lexicon=self.config.nlq.lexicon,
        )
        session.draft = draft
        self._trace(session, "parsed", draft.to_json())
        session.state = STATE_ANALYZED
        if draft.backend == "vector":
            return self._vector_flow(session, text, query_vector, index_kind)
        return self._relational_flow(session, text)

    # -- relational path -----------------------------------------------------

    def _relational_ceiling(self) -> float:
        return float(max(
            self.registry.catalog.table(t).row_count
            for t in self.registry.catalog.table_names()
        ))

    def _relational_flow(self, session: Session, text: str) -> dict:
        catalog = self.registry.catalog
        draft = session.draft
        lq = to_logical(draft, catalog)
        session.logical = lq
        baseline = explain(plan(lq, catalog), catalog)
        session.baseline_explain = baseline

        ceiling = self._relational_ceiling()
        lscore = self._linguistic(text)
        g, anchors = amb.ground_schema(text, catalog, self.config.nlq.stoplist)
        cn = amb.project_cost_signal(baseline, ceiling)
        signals = amb.AmbiguitySignals(lscore, g, cn, anchors)
        combined = amb.combine(signals, self.config.ambiguity)
        self._trace(session, "ambiguity", {
            "signals": signals.to_json(), "combined": combined,
            "vector": None, "ceiling": ceiling,
        })

        facets = miu.enumerate_facets_relational(
            draft.all_tables(), draft.constrained_refs(), catalog)
        scored = []
        for f in facets:
            stats = catalog.stats(f.column_ref().split(".", 1)[0])
            a = miu.align_score(f, text)
            gain = miu.estimate_gain_relational(f, stats, baseline.root_cardinality)
            cost = miu.estimate_filter_cost_relational(lq, f, catalog, ceiling)
            scored.append((f, miu.score(f, a, gain, cost, self.config.miu)))
        self._trace(session, "facets", {
            "facets": [f.to_json() for f, _ in scored],
            "scores": [s.to_json() for _, s in scored],
        })

        best = miu.rank(scored)
        if best is None:
            return self._execute_relational(session, asked=False,
                                            reason="no_facets")

        facet, fscore = best
        session.facet, session.facet_score = facet, fscore
        clarified_lq = lq.with_predicate(
            miu.facet_to_predicate(facet, facet.median_candidate()))
        clarified = explain(plan(clarified_lq, catalog), catalog)
        retries = cqo.estimate_retries(min(1.0, combined))
        voc = cqo.estimate_voc(baseline, clarified, w_h=self.config.cqo.w_h,
                               retries=retries,
                               quality_lift=self.config.cqo.quality_lift,
                               kappa=self.kappa)
        cod = cqo.estimate_cod(self.config.cqo.interaction_seconds,
                               self.config.cqo.user_time_rate,
                               self.config.cqo.llm_call_cost)
        decision = cqo.decide(voc, cod, fscore.m, self.config.cqo.slack)
        session.decision = decision
        self._trace(session, "decision", {
            "decision": decision.to_json(), "retries": retries,
            "facet_id": facet.id, "kappa": self.kappa,
            "clarified_cost": clarified.total_cost,
        })

        if decision.ask:
            return self._ask(session, facet)
        return self._execute_relational(session, asked=False, reason="gate")

    def _ask(self, session: Session, facet: miu.Facet) -> dict:
        question = nlq.synthesize_question(facet)
        if self.llm is not None:
            rephrased = llm_rephrase(self.llm, question.text, question.options)
            if rephrased:
                question = nlq.ClarificationQuestion(
                    facet_id=question.facet_id, text=rephrased,
                    options=question.options)
        session.question = question
        session.state = STATE_AWAITING
        self._trace(session, "question", question.to_json())
        return {"outcome": "question", "question": question.to_json(),
                "session_state": session.state}

    def _execute_relational(self, session: Session, asked: bool,
                            reason: str = "") -> dict:
        catalog = self.registry.catalog
        pplan = plan(session.logical, catalog)
        results = execute(pplan, catalog)
        session.state = STATE_DONE
        metrics = {
            "asked": asked,
            "reason": reason,
            "cost_baseline": session.baseline_explain.total_cost,
            "estimated_latency": session.baseline_explain.total_cost / self.kappa,
            "measured_latency": results.measured_latency,
        }
        self._trace(session, "executed", {
            "metrics": metrics, "actual_rows": results.actual_rows,
        })
        return {"outcome": "results", "results": results.to_json(max_rows=100),
                "metrics": metrics, "session_state": session.state}

    # -- vector path -----------------------------------------------------------

    def _vector_params(self) -> dict:
        return {"nprobe": self.config.vector.nprobe,
                "ef_search": self.config.vector.ef_search}

    def _vector_flow(self, session: Session, text: str,
                     query_vector: Optional[np.ndarray],
                     index_kind: str) -> dict:
        draft = session.draft
        bundle = self.registry.corpora[draft.target]
        corpus = bundle.corpus
        if index_kind not in ("ivf", "hnsw"):
            raise SessionError(f"unknown index kind {index_kind!r}")
        index = bundle.ivf if index_kind == "ivf" else bundle.hnsw
        if index is None:
            raise SessionError(f"corpus {draft.target!r} has no {index_kind} index")
        session.index_kind = index_kind

        if query_vector is not None:
            qv = np.asarray(query_vector, dtype=np.float64)
        else:
            qv = miu.hash_embed(draft.vector_text, dim=corpus.dim)
        if qv.shape != (corpus.dim,):
            raise SessionError(f"query vector must have dim {corpus.dim}")
        session.query_vector = qv
        k = draft.limit or self.config.vector.default_k
        session.k = k

        params = self._vector_params()
        hits, stats = search(index, qv, k, keyword_filter=draft.keyword_filter,
                             **params)
        session.baseline_hits = hits
        session.baseline_stats = stats

        ceiling = float(len(corpus))
        lscore = self._linguistic(text)
        vec_amb = None
        if len(corpus) >= 2 and len(hits) >= 2:
            vec_amb = amb.score_vector_ambiguity(qv, bundle.ivf, hits)
        l_eff = max(lscore, vec_amb.semantic_score) if vec_amb else lscore
        universe = [draft.target] + sorted(corpus.keyword_postings())
        g, anchors = amb.ground_terms(text, universe, self.config.nlq.stoplist)
        cn = amb.project_cost_signal(stats, ceiling)
        signals = amb.AmbiguitySignals(min(1.0, l_eff), g, cn, anchors)
        combined = amb.combine(signals, self.config.ambiguity)
        self._trace(session, "ambiguity", {
            "signals": signals.to_json(), "combined": combined,
            "vector": vec_amb.to_json() if vec_amb else None,
            "ceiling": ceiling,
        })

        facets = miu.enumerate_facets_vector(
            corpus, hits, amb.tokenize(draft.vector_text))
        scored = []
        filtered_stats_cache: dict[str, SearchStats] = {}
        for f in facets:
            a = miu.align_score(f, text)
            gain = miu.estimate_gain_vector(f, corpus,
                                            float(stats.candidates_scanned))
            _, fstats = search(index, qv, k,
                               keyword_filter=f.median_candidate(), **params)
            filtered_stats_cache[f.id] = fstats
            cost = miu.estimate_filter_cost_vector(
                stats.candidates_scanned, fstats.candidates_scanned, ceiling)
            scored.append((f, miu.score(f, a, gain, cost, self.config.miu)))
        self._trace(session, "facets", {
            "facets": [f.to_json() for f, _ in scored],
            "scores": [s.to_json() for _, s in scored],
        })

        best = miu.rank(scored)
        if best is None:
            return self._execute_vector(session, asked=False, reason="no_facets")

        facet, fscore = best
        session.facet, session.facet_score = facet, fscore
        clarified_stats = filtered_stats_cache[facet.id]
        retries = cqo.estimate_retries(min(1.0, combined))
        quality = self.config.cqo.quality_lift
        if vec_amb is not None and self.config.cqo.vector_quality_seconds > 0:
            quality += vec_amb.semantic_score * self.config.cqo.vector_quality_seconds
        voc = cqo.estimate_voc(stats, clarified_stats, w_h=self.config.cqo.w_h,
                               retries=retries, quality_lift=quality,
                               kappa=self.kappa)
        cod = cqo.estimate_cod(self.config.cqo.interaction_seconds,
                               self.config.cqo.user_time_rate,
                               self.config.cqo.llm_call_cost)
        decision = cqo.decide(voc, cod, fscore.m, self.config.cqo.slack)
        session.decision = decision
        self._trace(session, "decision", {
            "decision": decision.to_json(), "retries": retries,
            "facet_id": facet.id, "kappa": self.kappa,
            "clarified_scanned": clarified_stats.candidates_scanned,
        })

        if decision.ask:
            return self._ask(session, facet)
        return self._execute_vector(session, asked=False, reason="gate")

    def _hits_json(self, session: Session, hits: list) -> dict:
        corpus = self.registry.corpora[session.draft.target].corpus
        return {
            "columns": ["id", "distance", "keywords"],
            "rows": [
                [h.id, h.distance, sorted(corpus.keywords[h.pos])] for h in hits
            ],
            "actual_rows": len(hits),
        }

    def _execute_vector(self, session: Session, asked: bool,
                        reason: str = "") -> dict:
        session.state = STATE_DONE
        metrics = {
            "asked": asked,
            "reason": reason,
            "cost_baseline": float(session.baseline_stats.candidates_scanned),
            "estimated_latency":
                session.baseline_stats.candidates_scanned / self.kappa,
            "stats": session.baseline_stats.to_json(),
        }
        self._trace(session, "executed", {
            "metrics": metrics, "actual_rows": len(session.baseline_hits),
        })
        return {
            "outcome": "results",
            "results": self._hits_json(session, session.baseline_hits),
            "metrics": metrics,
            "session_state": session.state,
        }

    # -- answers ----------------------------------------------------------------

    def submit_answer(self, session: Session, answer: nlq.Answer) -> dict:
        if session.state != STATE_AWAITING:
            raise SessionError(f"session {session.id} is not awaiting an answer")
        if session.facet is None or answer.facet_id != session.facet.id:
            raise SessionError(
                f"answer targets facet {answer.facet_id!r}, pending facet is "
                f"{session.facet.id if session.facet else None!r}")
        baseline_draft = session.draft
        refined = nlq.apply_answer(baseline_draft, session.facet, answer)
        self._trace(session, "answer", {
            "facet_id": answer.facet_id,
            "selected": answer.selected if not isinstance(answer.selected, tuple)
            else list(answer.selected),
        })
        if refined.backend == "vector":
            out = self._finish_vector_answer(session, baseline_draft, refined)
        else:
            out = self._finish_relational_answer(session, refined)
        session.draft = refined
        return out

    def _finish_relational_answer(self, session: Session,
                                  refined: nlq.DraftQuery) -> dict:
        catalog = self.registry.catalog
        rlq = to_logical(refined, catalog)
        rplan = plan(rlq, catalog)
        rexplain = explain(rplan, catalog)
        results = execute(rplan, catalog)

        cost_b = session.baseline_explain.total_cost
        cost_c = rexplain.total_cost
        if self.config.harness_mode:
            baseline_rs = execute(plan(session.logical, catalog), catalog)
            baseline_latency = baseline_rs.measured_latency
            mode = "measured"
        else:
            baseline_latency = cost_b / self.kappa
            mode = "estimated"
        clarified_latency = results.measured_latency if mode == "measured" \
            else cost_c / self.kappa
        metrics = _speedup_metrics(cost_b, cost_c, baseline_latency,
                                   clarified_latency, self.kappa, mode)
        session.state = STATE_DONE
        self._trace(session, "executed", {
            "metrics": metrics, "actual_rows": results.actual_rows,
        })
        return {"outcome": "results", "results": results.to_json(max_rows=100),
                "metrics": metrics, "session_state": session.state}

    def _finish_vector_answer(self, session: Session,
                              baseline_draft: nlq.DraftQuery,
                              refined: nlq.DraftQuery) -> dict:
        bundle = self.registry.corpora[refined.target]
        index = bundle.ivf if session.index_kind == "ivf" else bundle.hnsw
        start = time.perf_counter()
        hits, stats = search(index, session.query_vector, session.k,
                             keyword_filter=refined.keyword_filter,
                             **self._vector_params())
        elapsed = time.perf_counter() - start
        cost_b = float(session.baseline_stats.candidates_scanned)
        cost_c = float(stats.candidates_scanned)
        if self.config.harness_mode:
            t0 = time.perf_counter()
            search(index, session.query_vector, session.k,
                   keyword_filter=baseline_draft.keyword_filter,
                   **self._vector_params())
            baseline_latency = time.perf_counter() - t0
            mode = "measured"
            clarified_latency = elapsed
        else:
            baseline_latency = cost_b / self.kappa
            clarified_latency = cost_c / self.kappa
            mode = "estimated"
        metrics = _speedup_metrics(cost_b, cost_c, baseline_latency,
                                   clarified_latency, self.kappa, mode)
        metrics["stats"] = stats.to_json()
        session.state = STATE_DONE
        session.baseline_hits = session.baseline_hits or []
        self._trace(session, "executed", {
            "metrics": metrics, "actual_rows": len(hits),
        })
        return {"outcome": "results",
                "results": self._hits_json(session, hits),
                "metrics": metrics, "session_state": session.state}

    def abandon(self, session: Session) -> dict:
        """Execute the baseline draft when the user (or policy) abstains."""
        if session.state != STATE_AWAITING:
            raise SessionError(f"session {session.id} is not awaiting an answer")
        if session.draft.backend == "vector":
            return self._execute_vector(session, asked=True, reason="abstained")
        return self._execute_relational(session, asked=True, reason="abstained")


def _ratio(num: float, den: float) -> float:
    # degenerate zero-cost denominators stay JSON-serializable
    if den > 0:
        return num / den
    return 1.0 if num <= 0 else max(1.0, num)


def _speedup_metrics(cost_b: float, cost_c: float, baseline_latency: float,
                     clarified_latency: float, kappa: float, mode: str) -> dict:
    return {
        "asked": True,
        "cost_baseline": cost_b,
        "cost_clarified": cost_c,
        "cost_speedup": _ratio(cost_b, cost_c),
        "baseline_latency": baseline_latency,
        "clarified_latency": clarified_latency,
        "speedup": _ratio(baseline_latency, clarified_latency),
        "estimated_baseline_latency": cost_b / kappa,
        "estimated_clarified_latency": cost_c / kappa,
        "mode": mode,
    }


# ---------------------------------------------------------------------------
# Simulated user
# ---------------------------------------------------------------------------


@dataclass
class SimulatedUser:
    """Headless answer policy driven by workload ground truth.

    Answers with the annotated value for the asked facet's target; with no
    annotation, evaluates every option against the ground truth and picks
    the best; with neither, abstains.
    """

    annotations: dict = field(default_factory=dict)
    evaluate_option: Optional[Callable[[int], float]] = None

    def answer(self, question: nlq.ClarificationQuestion,
               facet: miu.Facet) -> Optional[nlq.Answer]:
        if facet.target in self.annotations:
            value = self.annotations[facet.target]
            for i, cand in enumerate(facet.candidates):
                if cand == value or miu.render_candidate(facet.kind, cand) == str(value):
                    return nlq.Answer(facet_id=facet.id, selected=i)
            if isinstance(value, (tuple, list)) and len(value) == 2:
                return nlq.Answer(facet_id=facet.id, selected=tuple(value))
            return nlq.Answer(facet_id=facet.id, selected=str(value))
        if self.evaluate_option is not None:
            overlaps = [
                (self.evaluate_option(i), -i) for i in range(len(facet.candidates))
            ]
            best = max(range(len(overlaps)), key=lambda i: overlaps[i])
            return nlq.Answer(facet_id=facet.id, selected=best)
        return None
