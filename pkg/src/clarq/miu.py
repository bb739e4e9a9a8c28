"""Facet enumeration and the information-utility ranker.

Each candidate facet gets S = alpha*align + beta*gain - gamma*cost, with all
three terms native to [0,1], and a normalized confidence
m = (S + gamma) / (alpha + beta + gamma). The argmax facet is the one
clarification question worth asking; m < 0.5 means skip.
"""

from __future__ import annotations

import math
import zlib
from collections import Counter
from dataclasses import dataclass
from datetime import date
from typing import Callable, Optional, Sequence

import numpy as np

from .ambiguity import normalize_cost
from .catalog import Catalog, ColumnStats, Predicate, estimate_selectivity
from .engine import LogicalQuery, explain, plan
from .vector.corpus import EmbeddingCorpus
from .vector.search import Hit

FACET_CANDIDATE_CAP = 3
EMBED_DIM = 256
TOPIC_FACET_ID = "kw:topic"


@dataclass(frozen=True)
class Facet:
    id: str
    kind: str  # categorical | numeric-range | time-window | vector-keyword
    target: str
    candidates: tuple
    description: str

    def __post_init__(self) -> None:
        if not self.candidates:
            raise ValueError(f"facet {self.id} has no candidates")

    def column_ref(self) -> str:
        """Injection handle for relational facets ('col:<table.column>')."""
        if not self.id.startswith("col:"):
            raise ValueError(f"facet {self.id} is not a column facet")
        return self.id[4:]

    def median_candidate(self):
        return self.candidates[len(self.candidates) // 2]

    def to_json(self) -> dict:
        return {
            "id": self.id,
            "kind": self.kind,
            "target": self.target,
            "candidates": [render_candidate(self.kind, c) for c in self.candidates],
            "description": self.description,
        }


@dataclass(frozen=True)
class MiuWeights:
    alpha: float = 0.4
    beta: float = 0.4
    gamma: float = 0.2

    def __post_init__(self) -> None:
        if min(self.alpha, self.beta, self.gamma) < 0:
            raise ValueError("MIU weights must be >= 0")
        if self.alpha + self.beta + self.gamma <= 0:
            raise ValueError("MIU weights must not all be zero")


@dataclass(frozen=True)
class FacetScore:
    facet_id: str
    align: float
    gain: float
    cost: float
    S: float
    m: float

    def to_json(self) -> dict:
        return {
            "facet_id": self.facet_id,
            "align": self.align,
            "gain": self.gain,
            "cost": self.cost,
            "S": self.S,
            "m": self.m,
        }


def render_candidate(kind: str, candidate) -> str:
    """Human-readable candidate: ranges as 'lo to hi', values verbatim."""
    if kind in ("numeric-range", "time-window"):
        lo, hi = candidate
        return f"{_fmt(lo)} to {_fmt(hi)}"
    return str(candidate)


def _fmt(v) -> str:
    if isinstance(v, date):
        return v.isoformat()
    if isinstance(v, float):
        return f"{v:g}"
    return str(v)


# ---------------------------------------------------------------------------
# Alignment: deterministic character-3-gram hashing embedder
# ---------------------------------------------------------------------------


def hash_embed(text: str, dim: int = EMBED_DIM) -> np.ndarray:
    """Character 3-grams hashed (crc32) into `dim` buckets, L2-normalized."""
    vec = np.zeros(dim, dtype=np.float64)
    t = text.lower()
    grams = [t[i:i + 3] for i in range(len(t) - 2)] if len(t) >= 3 else ([t] if t else [])
    for g in grams:
        vec[zlib.crc32(g.encode("utf-8")) % dim] += 1.0
    norm = np.linalg.norm(vec)
    return vec / norm if norm > 0 else vec


Embedder = Callable[[str], np.ndarray]


def align_score(facet: Facet, query_text: str, embedder: Embedder = hash_embed) -> float:
    """(cosine(embed(query), embed(description)) + 1) / 2, in [0,1]."""
    if not facet.description.strip():
        return 0.0
    a = embedder(query_text)
    b = embedder(facet.description)
    na, nb = np.linalg.norm(a), np.linalg.norm(b)
    if na == 0 or nb == 0:
        return 0.0
    cos = float(np.dot(a, b) / (na * nb))
    return (max(-1.0, min(1.0, cos)) + 1.0) / 2.0


# ---------------------------------------------------------------------------
# Facet enumeration
# ---------------------------------------------------------------------------


def _tertile_bounds(stats: ColumnStats) -> Optional[tuple]:
    """Approximate (min, q33, q66, max) from the histogram."""
    hist = stats.histogram
    if hist is None or hist.total() == 0:
        return None
    if hist.lo == hist.hi:
        return None
    total = hist.total()
    targets = (total / 3.0, 2.0 * total / 3.0)
    qs = []
    cum = 0.0
    ti = 0
    w = hist.width
    for b, c in enumerate(hist.counts):
        while ti < 2 and c > 0 and cum + c >= targets[ti]:
            frac = (targets[ti] - cum) / c
            qs.append(hist.lo + (b + frac) * w)
            ti += 1
        cum += c
    while len(qs) < 2:
        qs.append(hist.hi)
    return (hist.lo, qs[0], qs[1], hist.hi)


def _as_column_value(x: float, kind: str):
    if kind == "integer":
        return int(round(x))
    if kind == "date":
        return date.fromordinal(int(round(x)))
    return round(x, 6)


def _range_candidates(stats: ColumnStats) -> Optional[tuple]:
    bounds = _tertile_bounds(stats)
    if bounds is None:
        return None
    lo, q33, q66, hi = (_as_column_value(b, stats.kind) for b in bounds)
    cands = []
    for pair in ((lo, q33), (q33, q66), (q66, hi)):
        if pair[0] != pair[1] or not cands:
            if pair not in cands:
                cands.append(pair)
    return tuple(cands[:FACET_CANDIDATE_CAP])


def _window_candidates(stats: ColumnStats) -> Optional[tuple]:
    """Recency windows anchored at the newest value: recent, wider, full."""
    bounds = _tertile_bounds(stats)
    if bounds is None:
        return None
    lo, q33, q66, hi = (_as_column_value(b, stats.kind) for b in bounds)
    cands = []
    for pair in ((q66, hi), (q33, hi), (lo, hi)):
        if pair not in cands:
            cands.append(pair)
    return tuple(cands[:FACET_CANDIDATE_CAP])


def facet_to_predicate(facet: Facet, candidate) -> Predicate:
    """Relational injection: categorical becomes eq, ranges become between."""
    ref = facet.column_ref()
    if facet.kind == "categorical":
        return Predicate(column=ref, op="eq", value=candidate)
    if facet.kind in ("numeric-range", "time-window"):
        lo, hi = candidate
        return Predicate(column=ref, op="between", lo=lo, hi=hi)
    raise ValueError(f"facet kind {facet.kind} does not inject a predicate")


def enumerate_facets_relational(
    tables: Sequence[str],
    constrained_refs: Sequence[str],
    catalog: Catalog,
) -> list[Facet]:
    """One facet per unconstrained column, by column type.

    Text columns become categorical facets over their top-3 values, numeric
    columns tertile ranges, date columns recency windows. Deterministic,
    sorted by facet id.
    """
    constrained = set(constrained_refs)
    facets: list[Facet] = []
    for tname in tables:
        table = catalog.table(tname)
        stats = catalog.stats(tname)
        for cname in table.schema.column_names():
            ref = f"{tname}.{cname}"
            if ref in constrained or cname in constrained:
                continue
            st = stats[cname]
            if st.ndv == 0:
                continue
            if st.kind == "text":
                values = tuple(v for v, _ in st.top_values[:FACET_CANDIDATE_CAP])
                if not values:
                    continue
                kind = "categorical"
                cands: tuple = values
            elif st.kind == "date":
                kind = "time-window"
                got = _window_candidates(st)
                if got is None:
                    continue
                cands = got
            else:
                kind = "numeric-range"
                got = _range_candidates(st)
                if got is None:
                    continue
                cands = got
            rendered = ", ".join(render_candidate(kind, c) for c in cands)
            facets.append(Facet(
                id=f"col:{ref}",
                kind=kind,
                target=cname,
                candidates=cands,
                description=f"{cname}: {rendered}",
            ))
    return sorted(facets, key=lambda f: f.id)


def enumerate_facets_vector(
    corpus: EmbeddingCorpus,
    hits: Sequence[Hit],
    query_terms: Sequence[str],
    doc_window: int = 50,
) -> list[Facet]:
    """One topic facet holding the top TF-IDF keywords of the top hits.

    TF counts keyword occurrences over the top `doc_window` retrieved docs;
    IDF is log(N/df) over the whole corpus. Query terms are excluded; an
    empty keyword pool yields no facet.
    """
    docs = hits[:doc_window]
    if not docs:
        return []
    tf = Counter()
    for h in docs:
        for kw in corpus.keywords[h.pos]:
            tf[kw] += 1
    exclude = {t.lower() for t in query_terms}
    n = len(corpus)
    postings = corpus.keyword_postings()
    scored = []
    for kw, count in tf.items():
        if kw.lower() in exclude:
            continue
        df = len(postings.get(kw, ()))
        if df == 0:
            continue
        scored.append((-count * math.log(n / df) if n > df else 0.0, kw))
    scored.sort()
    top = [kw for s, kw in scored[:FACET_CANDIDATE_CAP] if s < 0.0]
    if not top:
        return []
    return [Facet(
        id=TOPIC_FACET_ID,
        kind="vector-keyword",
        target="topic",
        candidates=tuple(top),
        description="topic keywords: " + ", ".join(top),
    )]


# ---------------------------------------------------------------------------
# Gain and cost terms
# ---------------------------------------------------------------------------


def gain_from_selectivities(selectivities: Sequence[float], result_rows: float) -> float:
    """Entropy shrinkage if the facet were pinned to one of its candidates.

    H = log2(max(2, R)), H' = sum_j s_j/sum(s) * log2(max(1, R*s_j));
    gain = clamp((H - H') / H, 0, 1).
    """
    if result_rows <= 0:
        return 0.0
    sels = [max(0.0, float(s)) for s in selectivities]
    total = sum(sels)
    if total <= 0:
        return 0.0
    h = math.log2(max(2.0, result_rows))
    h_after = sum(
        (s / total) * math.log2(max(1.0, result_rows * s)) for s in sels
    )
    gain = (h - h_after) / h
    if gain < 1e-12:  # exact zero when no candidate shrinks the result
        return 0.0
    return min(1.0, gain)


def estimate_gain_relational(facet: Facet, stats: dict[str, ColumnStats],
                             result_rows: float) -> float:
    column = facet.column_ref().split(".", 1)[1]
    st = stats[column]
    sels = [estimate_selectivity(facet_to_predicate(facet, c), st)
            for c in facet.candidates]
    return gain_from_selectivities(sels, result_rows)


def estimate_gain_vector(facet: Facet, corpus: EmbeddingCorpus,
                         candidate_count: float) -> float:
    sels = [corpus.posting_fraction(kw) for kw in facet.candidates]
    return gain_from_selectivities(sels, candidate_count)


def filter_ops_cost(report) -> float:
    return sum(c for kind, _, _, c in report.operators if kind == "Filter")


def estimate_filter_cost_relational(
    query: LogicalQuery,
    facet: Facet,
    catalog: Catalog,
    ceiling: float,
) -> float:
    """Incremental predicate-evaluation cost of the facet's median candidate.

    Re-plans with the injected predicate and normalizes the *added* filter
    operator cost by the shared ceiling; a facet whose predicate rides an
    existing filter adds nothing.
    """
    base = explain(plan(query, catalog), catalog)
    clarified = query.with_predicate(facet_to_predicate(facet, facet.median_candidate()))
    clar = explain(plan(clarified, catalog), catalog)
    incremental = max(0.0, filter_ops_cost(clar) - filter_ops_cost(base))
    return normalize_cost(incremental, ceiling)


def estimate_filter_cost_vector(
    baseline_scanned: float,
    filtered_scanned: float,
    ceiling: float,
) -> float:
    incremental = max(0.0, filtered_scanned - baseline_scanned)
    return normalize_cost(incremental, ceiling)


# ---------------------------------------------------------------------------
# Scoring and ranking
# ---------------------------------------------------------------------------


def score(facet: Facet, align: float, gain: float, cost: float,
          weights: MiuWeights = MiuWeights()) -> FacetScore:
    s = weights.alpha * align + weights.beta * gain - weights.gamma * cost
    m = (s + weights.gamma) / (weights.alpha + weights.beta + weights.gamma)
    return FacetScore(facet_id=facet.id, align=align, gain=gain, cost=cost,
                      S=s, m=m)


def rank(scored: Sequence[tuple[Facet, FacetScore]]) -> Optional[tuple[Facet, FacetScore]]:
    """Argmax by S, ties broken by ascending facet id; None when empty."""
    if not scored:
        return None
    return min(scored, key=lambda fs: (-fs[1].S, fs[0].id))
