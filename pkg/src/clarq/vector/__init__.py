"""Approximate nearest-neighbor indexes with per-search instrumentation."""

from .corpus import EmbeddingCorpus, load_corpus_jsonl, save_corpus_jsonl
from .hnsw import HnswIndex, build_hnsw
from .ivf import IvfIndex, build_ivf
from .search import Hit, SearchStats, brute_force_search, recall_at_k, search

__all__ = [
    "EmbeddingCorpus",
    "load_corpus_jsonl",
    "save_corpus_jsonl",
    "IvfIndex",
    "build_ivf",
    "HnswIndex",
    "build_hnsw",
    "Hit",
    "SearchStats",
    "search",
    "brute_force_search",
    "recall_at_k",
]
