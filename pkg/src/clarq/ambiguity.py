"""Ambiguity signals: linguistic vagueness, schema grounding, projected cost.

The three signals live in [0,1] and combine as a weighted sum
``delta*L + epsilon*(1-G) + zeta*Cn`` (low grounding means high ambiguity,
so G enters inverted). Vector queries add a semantic score built from the
boundary ratio between the two nearest centroids and the dispersion of the
top hits.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from typing import Optional, Sequence, Union

import numpy as np

from .catalog import Catalog
from .engine import ExplainReport
from .kernels import sq_dists
from .vector.ivf import IvfIndex
from .vector.search import Hit, SearchStats

DEFAULT_LEXICON = (
    "some", "recent", "top", "best", "high", "low", "large", "small",
    "popular", "successful", "unique", "many", "few", "good", "major",
)

DEFAULT_STOPLIST = (
    "a", "an", "the", "me", "my", "i", "we", "you", "it", "of", "in", "on",
    "at", "to", "for", "with", "and", "or", "by", "from", "as", "is", "are",
    "was", "were", "be", "that", "this", "these", "those", "show", "list",
    "find", "count", "get", "give", "all", "any", "please", "about", "where",
    "between", "limit", "order", "sorted", "ordered",
)

LEXICON_HIT_WEIGHT = 0.2
COMPARATIVE_TERMS = ("more than", "over")
EDIT_DISTANCE_THRESHOLD = 0.25

_WORD = re.compile(r"[a-z0-9_']+")
_NUMERAL = re.compile(r"^\d")


def tokenize(text: str) -> list[str]:
    return _WORD.findall(text.lower())


def score_linguistic(text: str, lexicon: Sequence[str] = DEFAULT_LEXICON) -> float:
    """Heuristic vagueness score: 0.2 per vague-term occurrence, clamped.

    Comparative phrases ("more than", "over") add 0.2 when no numeral
    follows them. An LLM scorer can replace this behind the same contract.
    """
    if not text.strip():
        raise ValueError("empty query text")
    tokens = tokenize(text)
    lex = set(lexicon)
    score = sum(LEXICON_HIT_WEIGHT for t in tokens if t in lex)
    for phrase in COMPARATIVE_TERMS:
        pwords = phrase.split()
        for i in range(len(tokens) - len(pwords) + 1):
            if tokens[i:i + len(pwords)] == pwords:
                nxt = tokens[i + len(pwords):i + len(pwords) + 1]
                if not nxt or not _NUMERAL.match(nxt[0]):
                    score += LEXICON_HIT_WEIGHT
    return min(1.0, score)


def edit_distance(a: str, b: str) -> int:
    """Plain Levenshtein distance."""
    if len(a) < len(b):
        a, b = b, a
    prev = list(range(len(b) + 1))
    for i, ca in enumerate(a, 1):
        cur = [i]
        for j, cb in enumerate(b, 1):
            cur.append(min(prev[j] + 1, cur[j - 1] + 1, prev[j - 1] + (ca != cb)))
        prev = cur
    return prev[-1]


def normalized_edit_distance(a: str, b: str) -> float:
    if not a and not b:
        return 0.0
    return edit_distance(a, b) / max(len(a), len(b))


def _anchors_term(term: str, universe: Sequence[str]) -> Optional[str]:
    for obj in universe:
        lo = obj.lower()
        if term in lo or lo in term:
            return obj
        if normalized_edit_distance(term, lo) <= EDIT_DISTANCE_THRESHOLD:
            return obj
    return None


def anchor_universe(catalog: Catalog) -> list[str]:
    """Table names, column names, and stored top values, deduplicated."""
    universe: list[str] = []
    seen = set()

    def add(s: str) -> None:
        if s not in seen:
            seen.add(s)
            universe.append(s)

    for tname in catalog.table_names():
        add(tname)
        table = catalog.table(tname)
        for cname in table.schema.column_names():
            add(cname)
        for st in catalog.stats(tname).values():
            for v, _ in st.top_values:
                if isinstance(v, str):
                    add(v)
    return universe


def ground_terms(
    text: str,
    universe: Sequence[str],
    stoplist: Sequence[str] = DEFAULT_STOPLIST,
) -> tuple[float, tuple[tuple[str, str], ...]]:
    """Fraction of distinct key terms that anchor to the universe.

    A term anchors on exact substring containment (either direction) or
    normalized edit distance <= 0.25. Pure-number tokens are literals, not
    key terms. No key terms means G = 1.
    """
    stop = set(stoplist)
    terms: list[str] = []
    for t in tokenize(text):
        if t not in stop and t not in terms and not t.isdigit():
            terms.append(t)
    if not terms:
        return 1.0, ()
    anchors = []
    for term in terms:
        hit = _anchors_term(term, universe)
        if hit is not None:
            anchors.append((term, hit))
    return len(anchors) / len(terms), tuple(anchors)


def ground_schema(
    text: str,
    catalog: Catalog,
    stoplist: Sequence[str] = DEFAULT_STOPLIST,
) -> tuple[float, tuple[tuple[str, str], ...]]:
    if not catalog.tables:
        raise ValueError("catalog has no tables")
    return ground_terms(text, anchor_universe(catalog), stoplist)


@dataclass(frozen=True)
class AmbiguitySignals:
    linguistic: float
    grounding: float
    cost_signal: float
    anchors: tuple[tuple[str, str], ...] = ()

    def __post_init__(self) -> None:
        for name in ("linguistic", "grounding", "cost_signal"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ValueError(f"{name} must be in [0,1], got {v}")

    def to_json(self) -> dict:
        return {
            "linguistic": self.linguistic,
            "grounding": self.grounding,
            "cost_signal": self.cost_signal,
            "anchors": [list(a) for a in self.anchors],
        }


@dataclass(frozen=True)
class AmbiguityWeights:
    delta: float = 0.4
    epsilon: float = 0.4
    zeta: float = 0.2

    def __post_init__(self) -> None:
        if min(self.delta, self.epsilon, self.zeta) < 0:
            raise ValueError("ambiguity weights must be >= 0")
        if abs(self.delta + self.epsilon + self.zeta - 1.0) > 1e-9:
            raise ValueError("ambiguity weights must sum to 1")


def normalize_cost(c: float, ceiling: float) -> float:
    """Log-scaled cost in [0,1]: min(1, log10(1+c) / log10(1+ceiling))."""
    if ceiling <= 0:
        raise ValueError("ceiling must be > 0")
    c = max(0.0, c)
    return min(1.0, math.log10(1.0 + c) / math.log10(1.0 + ceiling))


Evidence = Union[ExplainReport, SearchStats]


def evidence_cost(evidence: Evidence) -> float:
    """Operational-risk cost of a piece of backend evidence."""
    if isinstance(evidence, ExplainReport):
        return max(evidence.total_cost, 2.0 * evidence.max_operator_cost)
    if isinstance(evidence, SearchStats):
        return float(evidence.candidates_scanned)
    raise TypeError(f"unsupported evidence type {type(evidence).__name__}")


def project_cost_signal(evidence: Evidence, ceiling: float) -> float:
    return normalize_cost(evidence_cost(evidence), ceiling)


def combine(signals: AmbiguitySignals, weights: AmbiguityWeights = AmbiguityWeights()) -> float:
    """delta*L + epsilon*(1-G) + zeta*Cn."""
    return (
        weights.delta * signals.linguistic
        + weights.epsilon * (1.0 - signals.grounding)
        + weights.zeta * signals.cost_signal
    )


# ---------------------------------------------------------------------------
# Vector-side ambiguity
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class VectorAmbiguity:
    boundary_ratio: float
    dispersion: float
    semantic_score: float

    def to_json(self) -> dict:
        return {
            "boundary_ratio": self.boundary_ratio,
            "dispersion": self.dispersion,
            "semantic_score": self.semantic_score,
        }


def _mean_pairwise_sq(vectors: np.ndarray) -> float:
    n = len(vectors)
    sq = float(np.einsum("ij,ij->", vectors, vectors))
    total = vectors.sum(axis=0)
    return max(0.0, (2.0 * n * sq - 2.0 * float(total @ total)) / (n * (n - 1)))


def score_vector_ambiguity(
    query: np.ndarray,
    ivf_index: IvfIndex,
    hits: Sequence[Hit],
) -> VectorAmbiguity:
    """Boundary ratio of the two nearest centroids plus top-hit dispersion.

    boundary_ratio is d1/d2 in the index's (squared L2) distance, with the
    convention r = 0 when the query sits exactly on a centroid. dispersion
    is the mean pairwise distance of the hits over the corpus-wide mean,
    clamped to [0,1]. semantic_score averages the two.
    """
    corpus = ivf_index.corpus
    if len(corpus) < 2:
        raise ValueError("corpus must hold at least 2 docs")
    if len(hits) < 2:
        raise ValueError("need at least 2 hits (k >= 2)")

    q = np.ascontiguousarray(query, dtype=np.float64)
    cd = np.sort(sq_dists(q, ivf_index.centroids))
    if len(cd) < 2:
        ratio = 0.0
    elif cd[0] == 0.0:
        ratio = 0.0  # exactly on a centroid: maximally unambiguous
    else:
        ratio = float(cd[0] / cd[1]) if cd[1] > 0 else 1.0

    hit_vecs = corpus.vectors[[h.pos for h in hits]]
    hits_mean = _mean_pairwise_sq(hit_vecs)
    corpus_mean = corpus.mean_pairwise_sq()
    dispersion = min(1.0, hits_mean / corpus_mean) if corpus_mean > 0 else 0.0

    return VectorAmbiguity(
        boundary_ratio=ratio,
        dispersion=dispersion,
        semantic_score=0.5 * ratio + 0.5 * dispersion,
    )


def load_terms_file(path: str) -> tuple[str, ...]:
    """Plain-text term list: one term per line, '#' comments ignored."""
    terms = []
    with open(path, "r", encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if line and not line.startswith("#"):
                terms.append(line.lower())
    return tuple(terms)
