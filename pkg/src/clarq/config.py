"""Run configuration: weights, gate parameters, index parameters.

Loadable from a YAML file; every field has the shipped default so an empty
file is a valid config. See README for the documented schema.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Optional

import yaml

from .ambiguity import DEFAULT_LEXICON, DEFAULT_STOPLIST, AmbiguityWeights, load_terms_file
from .cqo import (
    DEFAULT_INTERACTION_SECONDS,
    DEFAULT_LLM_CALL_COST,
    DEFAULT_SLACK,
    DEFAULT_USER_TIME_RATE,
)
from .miu import MiuWeights
from .nlq import DEFAULT_VAGUE_MAP


@dataclass(frozen=True)
class CqoConfig:
    w_h: float = 1.0
    interaction_seconds: float = DEFAULT_INTERACTION_SECONDS
    user_time_rate: float = DEFAULT_USER_TIME_RATE
    llm_call_cost: float = DEFAULT_LLM_CALL_COST
    slack: float = DEFAULT_SLACK
    # Cost units per second; None means calibrate at startup.
    kappa: Optional[float] = None
    quality_lift: float = 0.0
    # Converts vector semantic ambiguity into a quality lift (seconds); 0 = off.
    # Latency alone never favors asking on the vector path (filtered searches
    # scan more), so the expected-recall-gain proxy is on by default.
    vector_quality_seconds: float = 30.0


@dataclass(frozen=True)
class VectorConfig:
    nlist: int = 64
    nprobe: int = 8
    M: int = 16
    ef_construction: int = 100
    ef_search: int = 64
    default_k: int = 10
    seed: int = 13


@dataclass(frozen=True)
class CatalogConfig:
    bucket_count: int = 32


@dataclass(frozen=True)
class NlqConfig:
    lexicon: tuple = DEFAULT_LEXICON
    stoplist: tuple = DEFAULT_STOPLIST
    vague_map: dict = field(default_factory=lambda: dict(DEFAULT_VAGUE_MAP))


@dataclass(frozen=True)
class RunConfig:
    miu: MiuWeights = MiuWeights()
    ambiguity: AmbiguityWeights = AmbiguityWeights()
    cqo: CqoConfig = CqoConfig()
    vector: VectorConfig = VectorConfig()
    catalog: CatalogConfig = CatalogConfig()
    nlq: NlqConfig = NlqConfig()
    llm_enabled: bool = False
    trace_dir: Optional[str] = None
    harness_mode: bool = True  # double-execute for measured speedups


def default_config() -> RunConfig:
    return RunConfig()


def _weights(cls, data: dict, names: tuple):
    kwargs = {n: float(data[n]) for n in names if n in data}
    return cls(**kwargs)


def load_config(path: str | Path) -> RunConfig:
    """Build a RunConfig from a YAML file; missing keys keep defaults."""
    with open(path, "r", encoding="utf-8") as fh:
        data = yaml.safe_load(fh) or {}

    cfg = default_config()

    if "miu" in data:
        cfg = replace(cfg, miu=_weights(MiuWeights, data["miu"],
                                        ("alpha", "beta", "gamma")))
    if "ambiguity" in data:
        cfg = replace(cfg, ambiguity=_weights(AmbiguityWeights, data["ambiguity"],
                                              ("delta", "epsilon", "zeta")))
    if "cqo" in data:
        allowed = ("w_h", "interaction_seconds", "user_time_rate", "llm_call_cost",
                   "slack", "kappa", "quality_lift", "vector_quality_seconds")
        kwargs = {k: data["cqo"][k] for k in allowed if k in data["cqo"]}
        cfg = replace(cfg, cqo=CqoConfig(**kwargs))
    if "vector" in data:
        allowed = ("nlist", "nprobe", "M", "ef_construction", "ef_search",
                   "default_k", "seed")
        kwargs = {k: int(data["vector"][k]) for k in allowed if k in data["vector"]}
        cfg = replace(cfg, vector=VectorConfig(**kwargs))
    if "catalog" in data:
        cfg = replace(cfg, catalog=CatalogConfig(
            bucket_count=int(data["catalog"].get("bucket_count", 32))))
    if "nlq" in data:
        nd = data["nlq"]
        lexicon = tuple(nd["lexicon"]) if "lexicon" in nd else (
            load_terms_file(nd["lexicon_file"]) if "lexicon_file" in nd
            else DEFAULT_LEXICON)
        stoplist = tuple(nd["stoplist"]) if "stoplist" in nd else (
            load_terms_file(nd["stoplist_file"]) if "stoplist_file" in nd
            else DEFAULT_STOPLIST)
        vague_map = dict(DEFAULT_VAGUE_MAP)
        vague_map.update(nd.get("vague_map", {}))
        cfg = replace(cfg, nlq=NlqConfig(lexicon=lexicon, stoplist=stoplist,
                                         vague_map=vague_map))
    for key in ("llm_enabled", "harness_mode"):
        if key in data:
            cfg = replace(cfg, **{key: bool(data[key])})
    if "trace_dir" in data:
        cfg = replace(cfg, trace_dir=str(data["trace_dir"]))
    return cfg
