"""IVF-Flat index: k-means partitioning with inverted posting lists."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..kernels import as_f64_c, assign_nearest, sq_dists
from .corpus import EmbeddingCorpus

KMEANS_ITERATIONS = 10


@dataclass
class IvfIndex:
    corpus: EmbeddingCorpus
    nlist: int
    centroids: np.ndarray  # (nlist, dim)
    posting_lists: list  # nlist arrays of doc positions
    seed: int

    def list_sizes(self) -> list[int]:
        return [len(p) for p in self.posting_lists]


def _kmeans_pp_init(x: np.ndarray, k: int, rng: np.random.Generator) -> np.ndarray:
    """k-means++ seeding: first centroid uniform, the rest D^2-weighted."""
    n = x.shape[0]
    centroids = np.empty((k, x.shape[1]), dtype=np.float64)
    first = int(rng.integers(n))
    centroids[0] = x[first]
    d2 = sq_dists(centroids[0], x)
    for i in range(1, k):
        total = float(d2.sum())
        if total <= 0.0:
            # all remaining points coincide with a chosen centroid
            idx = int(rng.integers(n))
        else:
            idx = int(rng.choice(n, p=d2 / total))
        centroids[i] = x[idx]
        np.minimum(d2, sq_dists(centroids[i], x), out=d2)
    return centroids


def _repair_empty(labels: np.ndarray, dists: np.ndarray, k: int) -> None:
    """Reassign the farthest point of the largest cluster into each empty one."""
    counts = np.bincount(labels, minlength=k)
    for empty in np.where(counts == 0)[0]:
        donor = int(np.argmax(counts))
        members = np.where(labels == donor)[0]
        far = members[int(np.argmax(dists[members]))]
        labels[far] = empty
        dists[far] = 0.0
        counts[donor] -= 1
        counts[empty] += 1


def build_ivf(corpus: EmbeddingCorpus, nlist: int, seed: int) -> IvfIndex:
    """k-means (k-means++ seeding, 10 iterations) over the corpus vectors.

    Empty clusters are repaired by splitting the largest. Deterministic for
    a given seed.
    """
    if nlist < 1:
        raise ValueError("nlist must be >= 1")
    if len(corpus) == 0:
        raise ValueError("corpus is empty")
    if nlist > len(corpus):
        raise ValueError(f"nlist {nlist} exceeds corpus size {len(corpus)}")

    x = corpus.vectors
    rng = np.random.default_rng(seed)
    centroids = _kmeans_pp_init(x, nlist, rng)

    labels = np.zeros(len(corpus), dtype=np.int64)
    for _ in range(KMEANS_ITERATIONS):
        labels, dists = assign_nearest(x, centroids)
        _repair_empty(labels, dists, nlist)
        for c in range(nlist):
            members = x[labels == c]
            if len(members):
                centroids[c] = members.mean(axis=0)

    labels, dists = assign_nearest(x, centroids)
    _repair_empty(labels, dists, nlist)
    posting_lists = [
        np.where(labels == c)[0].astype(np.int64) for c in range(nlist)
    ]
    return IvfIndex(
        corpus=corpus,
        nlist=nlist,
        centroids=as_f64_c(centroids),
        posting_lists=posting_lists,
        seed=seed,
    )
