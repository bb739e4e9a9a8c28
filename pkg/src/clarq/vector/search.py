"""Search over IVF/HNSW indexes: top-k, stats, keyword post-filtering."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Union

import numpy as np

from ..kernels import sq_dists, sq_dists_gather
from .corpus import EmbeddingCorpus
from .hnsw import HnswIndex, _greedy_descent, _search_layer
from .ivf import IvfIndex


@dataclass
class SearchStats:
    lists_probed: int = 0
    hops: int = 0
    candidates_scanned: int = 0
    filtered_out: int = 0

    def merge(self, other: "SearchStats") -> None:
        self.lists_probed += other.lists_probed
        self.hops += other.hops
        self.candidates_scanned += other.candidates_scanned
        self.filtered_out += other.filtered_out

    def to_json(self) -> dict:
        return {
            "lists_probed": self.lists_probed,
            "hops": self.hops,
            "candidates_scanned": self.candidates_scanned,
            "filtered_out": self.filtered_out,
        }


@dataclass(frozen=True)
class Hit:
    id: object
    distance: float
    pos: int


Index = Union[IvfIndex, HnswIndex]


def _rank(corpus: EmbeddingCorpus, pairs) -> list[Hit]:
    """Sort (dist, pos) pairs by ascending distance, ties by doc id."""
    hits = [Hit(corpus.ids[p], float(d), p) for d, p in pairs]
    hits.sort(key=lambda h: (h.distance, h.id))
    return hits


def _ivf_round(index: IvfIndex, q: np.ndarray, fetch: int, nprobe: int,
               stats: SearchStats) -> tuple[list[Hit], list[int]]:
    nprobe = max(1, min(nprobe, index.nlist))
    cd = sq_dists(q, index.centroids)
    order = np.lexsort((np.arange(index.nlist), cd))
    probe = order[:nprobe]
    chunks = [index.posting_lists[c] for c in probe if len(index.posting_lists[c])]
    if chunks:
        cand = np.concatenate(chunks)
    else:
        cand = np.empty(0, dtype=np.int64)
    dists = sq_dists_gather(q, index.corpus.vectors, cand) if len(cand) else np.empty(0)
    evaluated = cand.tolist()
    stats.lists_probed += nprobe
    stats.candidates_scanned += len(evaluated)
    hits = _rank(index.corpus, zip(dists.tolist(), evaluated))
    return hits[: max(fetch, 0)], evaluated


def _hnsw_round(index: HnswIndex, q: np.ndarray, fetch: int, ef: int,
                stats: SearchStats) -> tuple[list[Hit], list[int]]:
    vectors = index.corpus.vectors
    ef_eff = max(ef, fetch, 1)
    start = np.asarray([index.entry_point], dtype=np.int64)
    d0 = float(sq_dists_gather(q, vectors, start)[0])
    ep = (d0, index.entry_point)
    evaluated = [index.entry_point]
    hops = 0
    for level in range(index.max_level, 0, -1):
        d, p, h, evs = _greedy_descent(vectors, q, ep, index.layers[level])
        ep = (d, p)
        hops += h
        evaluated.extend(evs)
    out = _search_layer(vectors, q, [ep], ef_eff, index.layers[0])
    hops += out.hops
    evaluated.extend(out.evaluated)
    stats.hops += hops
    stats.candidates_scanned += len(evaluated)
    hits = _rank(index.corpus, out.found)
    return hits[: max(fetch, 0)], evaluated


def _round(index: Index, q: np.ndarray, fetch: int, param: int,
           stats: SearchStats) -> tuple[list[Hit], list[int]]:
    if isinstance(index, IvfIndex):
        return _ivf_round(index, q, fetch, param, stats)
    return _hnsw_round(index, q, fetch, param, stats)


def _exhausted(index: Index, fetch: int, param: int) -> bool:
    n = len(index.corpus)
    if isinstance(index, IvfIndex):
        return fetch >= n and param >= index.nlist
    return fetch >= n


OVERFETCH_FACTOR = 4


def search(
    index: Index,
    query: np.ndarray,
    k: int,
    nprobe: Optional[int] = None,
    ef_search: Optional[int] = None,
    keyword_filter: Optional[str] = None,
) -> tuple[list[Hit], SearchStats]:
    """Top-k by ascending squared L2, ties by doc id.

    With a keyword filter, candidates are over-fetched (4k, doubling the
    fetch and the probe width each retry) and post-filtered until k matches
    are found or the whole corpus has been considered. Stats accumulate over
    retries; filtered_out counts scanned candidates that fail the keyword.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    q = np.ascontiguousarray(query, dtype=np.float64)
    if q.shape != (index.corpus.dim,):
        raise ValueError(f"query must have dim {index.corpus.dim}")
    if isinstance(index, IvfIndex):
        param = nprobe if nprobe is not None else 1
    else:
        param = ef_search if ef_search is not None else max(16, k)

    stats = SearchStats()
    n = len(index.corpus)

    if keyword_filter is None:
        hits, _ = _round(index, q, min(k, n), param, stats)
        return hits[:k], stats

    postings = index.corpus.keyword_postings()
    member = set(postings.get(keyword_filter, np.empty(0, dtype=np.int64)).tolist())

    fetch = min(n, OVERFETCH_FACTOR * k)
    while True:
        raw, evaluated = _round(index, q, fetch, param, stats)
        stats.filtered_out += sum(1 for p in evaluated if p not in member)
        kept = [h for h in raw if keyword_filter in index.corpus.keywords[h.pos]]
        if len(kept) >= k or _exhausted(index, fetch, param):
            return kept[:k], stats
        fetch = min(n, fetch * 2)
        param = min(param * 2, index.nlist if isinstance(index, IvfIndex) else n)


def brute_force_search(corpus: EmbeddingCorpus, query: np.ndarray, k: int) -> list[Hit]:
    """Exact top-k by squared L2 over the whole corpus, ties by doc id."""
    if k < 1:
        raise ValueError("k must be >= 1")
    q = np.ascontiguousarray(query, dtype=np.float64)
    dists = sq_dists(q, corpus.vectors)
    return _rank(corpus, zip(dists.tolist(), range(len(corpus))))[: min(k, len(corpus))]


def recall_at_k(hits: list, truth_ids, k: int) -> float:
    """|top-k hit ids intersect truth| / min(k, |truth|)."""
    if k < 1:
        raise ValueError("k must be >= 1")
    truth = set(truth_ids)
    if not truth:
        raise ValueError("empty ground-truth set")
    top = {h.id for h in hits[:k]}
    return len(top & truth) / min(k, len(truth))
