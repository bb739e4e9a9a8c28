"""Embedding corpus: vectors plus per-doc metadata (id, keywords, label)."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Union

import numpy as np

from ..kernels import as_f64_c


@dataclass
class EmbeddingCorpus:
    dim: int
    vectors: np.ndarray  # (n, dim) float64, C-contiguous
    ids: list
    keywords: list[frozenset]
    labels: Optional[list[int]] = None  # generator cluster labels, if synthetic

    _postings: Optional[dict] = field(default=None, repr=False, compare=False)
    _mean_pair: Optional[float] = field(default=None, repr=False, compare=False)

    def __post_init__(self) -> None:
        self.vectors = as_f64_c(self.vectors)
        if self.vectors.ndim != 2 or self.vectors.shape[1] != self.dim:
            raise ValueError(f"vectors must be (n, {self.dim})")
        if len(self.ids) != len(self.vectors):
            raise ValueError("ids length != vector count")
        if len(set(self.ids)) != len(self.ids):
            raise ValueError("doc ids must be unique")
        if len(self.keywords) != len(self.ids):
            raise ValueError("keywords length != vector count")
        self.keywords = [frozenset(k) for k in self.keywords]

    def __len__(self) -> int:
        return len(self.ids)

    def keyword_postings(self) -> dict:
        """keyword -> sorted positions of docs carrying it (built once)."""
        if self._postings is None:
            postings: dict[str, list[int]] = {}
            for pos, kws in enumerate(self.keywords):
                for kw in kws:
                    postings.setdefault(kw, []).append(pos)
            self._postings = {
                kw: np.asarray(pos_list, dtype=np.int64)
                for kw, pos_list in postings.items()
            }
        return self._postings

    def posting_fraction(self, keyword: str) -> float:
        postings = self.keyword_postings()
        if keyword not in postings:
            return 0.0
        return len(postings[keyword]) / len(self)

    def mean_pairwise_sq(self) -> float:
        """Mean squared L2 distance over ordered pairs i != j (closed form)."""
        if self._mean_pair is None:
            n = len(self)
            if n < 2:
                raise ValueError("need >= 2 docs for pairwise distance")
            sq = float(np.einsum("ij,ij->", self.vectors, self.vectors))
            total = self.vectors.sum(axis=0)
            ssum = 2.0 * n * sq - 2.0 * float(total @ total)
            self._mean_pair = max(0.0, ssum / (n * (n - 1)))
        return self._mean_pair


Source = Union[str, Path]


def load_corpus_jsonl(source: Source, dim: Optional[int] = None) -> EmbeddingCorpus:
    """Read {id, vector, keywords[, label]} records, one JSON object per line."""
    ids, vecs, kws, labels = [], [], [], []
    saw_label = False
    with open(source, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh):
            line = line.strip()
            if not line:
                continue
            rec = json.loads(line)
            try:
                ids.append(rec["id"])
                vecs.append(rec["vector"])
                kws.append(frozenset(rec.get("keywords", ())))
            except KeyError as exc:
                raise ValueError(f"line {lineno}: missing field {exc}") from None
            if "label" in rec:
                saw_label = True
                labels.append(rec["label"])
            else:
                labels.append(None)
    if not vecs:
        raise ValueError(f"no records in {source}")
    mat = np.asarray(vecs, dtype=np.float64)
    if mat.ndim != 2:
        raise ValueError("vectors have inconsistent lengths")
    d = dim or mat.shape[1]
    return EmbeddingCorpus(
        dim=d,
        vectors=mat,
        ids=ids,
        keywords=kws,
        labels=labels if saw_label else None,
    )


def save_corpus_jsonl(corpus: EmbeddingCorpus, path: Source) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for pos in range(len(corpus)):
            rec = {
                "id": corpus.ids[pos],
                "vector": [float(v) for v in corpus.vectors[pos]],
                "keywords": sorted(corpus.keywords[pos]),
            }
            if corpus.labels is not None:
                rec["label"] = corpus.labels[pos]
            fh.write(json.dumps(rec, sort_keys=True) + "\n")
