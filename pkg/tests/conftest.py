"""Shared fixtures: seeded synthetic datasets and prebuilt indexes."""

from __future__ import annotations

import numpy as np
import pytest

from clarq.catalog import Catalog
from clarq.config import CqoConfig, RunConfig, VectorConfig
from clarq.harness.synth import generate_corpus, generate_synthetic
from clarq.session import Registry
from clarq.vector.hnsw import build_hnsw
from clarq.vector.ivf import build_ivf

SEED = 7
CORPUS_SEED = 9
INDEX_SEED = 13


def harness_config(**cqo_overrides) -> RunConfig:
    cqo = dict(kappa=5000.0, vector_quality_seconds=30.0)
    cqo.update(cqo_overrides)
    return RunConfig(cqo=CqoConfig(**cqo), vector=VectorConfig(nlist=50))


@pytest.fixture(scope="session")
def small_data():
    return generate_synthetic(SEED, "small")


@pytest.fixture(scope="session")
def movie_catalog(small_data) -> Catalog:
    catalog = Catalog()
    for table in small_data.tables.values():
        catalog.add(table)
    return catalog


@pytest.fixture(scope="session")
def registry(small_data, movie_catalog) -> Registry:
    reg = Registry(movie_catalog)
    reg.add_corpus("papers", small_data.corpus, harness_config())
    return reg


@pytest.fixture(scope="session")
def big_corpus():
    return generate_corpus(CORPUS_SEED, 20_000, 50, 32)


@pytest.fixture(scope="session")
def big_ivf(big_corpus):
    return build_ivf(big_corpus, nlist=50, seed=INDEX_SEED)


@pytest.fixture(scope="session")
def big_hnsw(big_corpus):
    return build_hnsw(big_corpus, M=16, ef_construction=100, seed=INDEX_SEED)


@pytest.fixture(scope="session")
def tiny_corpus():
    return generate_corpus(4, 500, 10, 8)


@pytest.fixture()
def rng():
    return np.random.default_rng(1234)
