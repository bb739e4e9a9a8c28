"""Hierarchical navigable small-world graph index.

Levels are drawn as floor(-ln(u) / ln(M)); inserts use an ef_construction
candidate beam; neighbor sets are pruned to 2M at level 0 and M above.
Construction is single-threaded and fully deterministic per seed, and the
level-0 graph is verified (and if needed repaired) to be connected so that
an exhaustive search (ef = corpus size) matches brute force exactly.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass

import numpy as np

from ..kernels import select_diverse, sq_dists_gather
from .corpus import EmbeddingCorpus


@dataclass
class _SearchOutcome:
    found: list  # (dist, pos) sorted ascending
    hops: int
    evaluated: list  # positions whose distance was computed


@dataclass
class HnswIndex:
    corpus: EmbeddingCorpus
    M: int
    ef_construction: int
    seed: int
    levels: list  # per-position top level
    layers: list  # per level: dict pos -> list of neighbor positions
    entry_point: int
    max_level: int

    def degree_cap(self, level: int) -> int:
        return 2 * self.M if level == 0 else self.M

    def neighbors(self, level: int, pos: int) -> list:
        return self.layers[level].get(pos, [])


def _search_layer(vectors: np.ndarray, q: np.ndarray, entries: list,
                  ef: int, adjacency: dict) -> _SearchOutcome:
    """Beam search over one layer from the given (dist, pos) entries.

    ``evaluated`` records only the distance computations made here (entry
    distances are the caller's), one entry per evaluation.
    """
    visited = {p for _, p in entries}
    candidates = list(entries)  # min-heap by (dist, pos)
    heapq.heapify(candidates)
    results = [(-d, p) for d, p in entries]  # max-heap of current best ef
    heapq.heapify(results)
    while len(results) > ef:
        heapq.heappop(results)
    hops = 0
    evaluated: list[int] = []

    while candidates:
        d, p = heapq.heappop(candidates)
        hops += 1
        if len(results) >= ef and d > -results[0][0]:
            break
        fresh = [nb for nb in adjacency.get(p, []) if nb not in visited]
        if not fresh:
            continue
        visited.update(fresh)
        evaluated.extend(fresh)
        idx = np.asarray(fresh, dtype=np.int64)
        dists = sq_dists_gather(q, vectors, idx)
        for nb, dn in zip(fresh, dists):
            dn = float(dn)
            if len(results) < ef or dn < -results[0][0]:
                heapq.heappush(candidates, (dn, nb))
                heapq.heappush(results, (-dn, nb))
                if len(results) > ef:
                    heapq.heappop(results)
    found = sorted(((-nd, p) for nd, p in results))
    return _SearchOutcome(found=found, hops=hops, evaluated=evaluated)


def _greedy_descent(vectors: np.ndarray, q: np.ndarray, start: tuple,
                    adjacency: dict) -> tuple:
    """ef=1 greedy walk; returns (dist, pos, hops, evaluated positions)."""
    cur_d, cur = start
    hops = 0
    evaluated: list[int] = []
    improved = True
    while improved:
        improved = False
        hops += 1
        nbs = adjacency.get(cur, [])
        if not nbs:
            break
        idx = np.asarray(nbs, dtype=np.int64)
        dists = sq_dists_gather(q, vectors, idx)
        evaluated.extend(nbs)
        best = int(np.argmin(dists))
        if float(dists[best]) < cur_d:
            cur_d = float(dists[best])
            cur = nbs[best]
            improved = True
    return cur_d, cur, hops, evaluated


def _select_neighbors(vectors: np.ndarray, ranked: list, cap: int) -> list:
    """Diversity-aware neighbor selection over (dist, pos) pairs.

    A candidate is kept only while it is closer to the anchor than to any
    already-kept neighbor; remaining slots are backfilled with the skipped
    candidates in distance order. This is what keeps the graph navigable
    across clustered data.
    """
    if len(ranked) <= 1:
        return sorted(c for _, c in ranked[:cap])
    cands = [c for _, c in ranked]
    anchor_d = np.asarray([d for d, _ in ranked], dtype=np.float64)
    sub = vectors[np.asarray(cands, dtype=np.int64)]
    picked = select_diverse(sub, anchor_d, cap)
    return sorted(cands[i] for i in picked)


def _prune(vectors: np.ndarray, pos: int, neighbors: list, cap: int) -> list:
    """Re-select pos's neighbor list down to cap with the diversity rule."""
    if len(neighbors) <= cap:
        return sorted(neighbors)
    idx = np.asarray(neighbors, dtype=np.int64)
    dists = sq_dists_gather(vectors[pos], vectors, idx)
    ranked = sorted(zip(dists.tolist(), neighbors))
    return _select_neighbors(vectors, ranked, cap)


def build_hnsw(corpus: EmbeddingCorpus, M: int, ef_construction: int,
               seed: int) -> HnswIndex:
    if M < 2:
        raise ValueError("M must be >= 2")
    if len(corpus) == 0:
        raise ValueError("corpus is empty")

    vectors = corpus.vectors
    rng = np.random.default_rng(seed)
    ml = 1.0 / math.log(M)
    levels: list[int] = []
    layers: list[dict] = [dict()]
    entry_point = 0
    max_level = 0

    for pos in range(len(corpus)):
        u = 1.0 - rng.random()  # u in (0, 1], so log is finite
        level = int(math.floor(-math.log(u) * ml))
        levels.append(level)
        while len(layers) <= level:
            layers.append(dict())

        if pos == 0:
            for l in range(level + 1):
                layers[l][pos] = []
            entry_point = pos
            max_level = level
            continue

        q = vectors[pos]
        ep_d = float(sq_dists_gather(q, vectors,
                                     np.asarray([entry_point], dtype=np.int64))[0])
        ep = (ep_d, entry_point)

        for l in range(max_level, level, -1):
            d, p, _, _ = _greedy_descent(vectors, q, ep, layers[l])
            ep = (d, p)

        entries = [ep]
        for l in range(min(level, max_level), -1, -1):
            out = _search_layer(vectors, q, entries, ef_construction, layers[l])
            cap = 2 * M if l == 0 else M
            chosen = _select_neighbors(vectors, out.found, M)
            layers[l][pos] = sorted(chosen)
            for nb in chosen:
                merged = layers[l].get(nb, []) + [pos]
                layers[l][nb] = _prune(vectors, nb, merged, cap)
            entries = out.found

        if level > max_level:
            max_level = level
            entry_point = pos

    index = HnswIndex(
        corpus=corpus,
        M=M,
        ef_construction=ef_construction,
        seed=seed,
        levels=levels,
        layers=layers,
        entry_point=entry_point,
        max_level=max_level,
    )
    _ensure_connected(index)
    return index


def _with_protected_edge(vectors: np.ndarray, node: int, neighbors: list,
                         must_keep: int, cap: int) -> list:
    """Add must_keep to node's list, pruning to cap without dropping it."""
    merged = sorted(set(neighbors) | {must_keep})
    if len(merged) <= cap:
        return merged
    keep = _prune(vectors, node, merged, cap)
    if must_keep not in keep:
        # drop the farthest survivor to make room for the protected edge
        idx = np.asarray(keep, dtype=np.int64)
        d = sq_dists_gather(vectors[node], vectors, idx)
        drop = keep[int(np.argmax(d))]
        keep = sorted((set(keep) - {drop}) | {must_keep})
    return sorted(keep)


def _reachable(index: HnswIndex) -> set:
    seen = {index.entry_point}
    frontier = [index.entry_point]
    adj = index.layers[0]
    while frontier:
        cur = frontier.pop()
        for nb in adj.get(cur, []):
            if nb not in seen:
                seen.add(nb)
                frontier.append(nb)
    return seen


def _ensure_connected(index: HnswIndex) -> None:
    """Attach any level-0 stragglers to their nearest reachable node.

    Pruning can (rarely) orphan a node; exhaustive search correctness relies
    on level-0 connectivity, so patch edges deterministically until the graph
    is one component.
    """
    n = len(index.corpus)
    vectors = index.corpus.vectors
    adj = index.layers[0]
    cap = index.degree_cap(0)
    for _ in range(2 * n):
        seen = _reachable(index)
        if len(seen) >= n:
            return
        orphan = min(p for p in range(n) if p not in seen)
        reach = np.asarray(sorted(seen), dtype=np.int64)
        dists = sq_dists_gather(vectors[orphan], vectors, reach)
        target = int(reach[int(np.argmin(dists))])
        adj[orphan] = _with_protected_edge(vectors, orphan, adj.get(orphan, []),
                                           target, cap)
        adj[target] = _with_protected_edge(vectors, target, adj.get(target, []),
                                           orphan, cap)
    raise RuntimeError("could not connect level-0 graph")
