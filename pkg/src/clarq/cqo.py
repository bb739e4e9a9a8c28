"""The clarification gate: value of asking vs cost of asking.

A question is worth asking when the projected benefit (latency saved by the
cheaper clarified plan, any configured quality lift, and the avoided-retry
effort term w_h * log2(N)) beats the dialogue cost (user interaction time
plus the small LLM call overhead) with a safety margin, and the ranker is
confident enough (m >= 0.5).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Union

from .engine import ExplainReport
from .vector.search import SearchStats

M_THRESHOLD = 0.5
DEFAULT_SLACK = 0.05
DEFAULT_INTERACTION_SECONDS = 10.0
DEFAULT_USER_TIME_RATE = 1.0
DEFAULT_LLM_CALL_COST = 0.5
MAX_RETRIES = 5


@dataclass(frozen=True)
class VocEstimate:
    latency_saved: float
    quality_lift: float
    effort_term: float

    @property
    def total(self) -> float:
        return self.latency_saved + self.quality_lift + self.effort_term

    def to_json(self) -> dict:
        return {
            "latency_saved": self.latency_saved,
            "quality_lift": self.quality_lift,
            "effort_term": self.effort_term,
            "total": self.total,
        }


@dataclass(frozen=True)
class CodEstimate:
    interaction_seconds: float  # already priced at the user time rate
    llm_call_cost: float

    @property
    def total(self) -> float:
        return self.interaction_seconds + self.llm_call_cost

    def to_json(self) -> dict:
        return {
            "interaction_seconds": self.interaction_seconds,
            "llm_call_cost": self.llm_call_cost,
            "total": self.total,
        }


@dataclass(frozen=True)
class ClarificationDecision:
    ask: bool
    voc: VocEstimate
    cod: CodEstimate
    m: float
    slack: float

    def to_json(self) -> dict:
        return {
            "ask": self.ask,
            "voc": self.voc.to_json(),
            "cod": self.cod.to_json(),
            "m": self.m,
            "slack": self.slack,
        }


Evidence = Union[ExplainReport, SearchStats]


def _cost_of(evidence: Evidence) -> float:
    if isinstance(evidence, ExplainReport):
        return evidence.total_cost
    if isinstance(evidence, SearchStats):
        return float(evidence.candidates_scanned)
    raise TypeError(f"unsupported evidence type {type(evidence).__name__}")


def estimate_voc(
    baseline: Evidence,
    clarified: Evidence,
    w_h: float = 1.0,
    retries: int = 1,
    quality_lift: float = 0.0,
    kappa: float = 1.0,
) -> VocEstimate:
    """Seconds-equivalent value of asking one clarification.

    latency_saved converts the cost delta between the baseline and the
    clarified evidence at kappa cost-units per second, floored at zero;
    the effort term is w_h * log2(retries).
    """
    if type(baseline) is not type(clarified):
        raise TypeError(
            f"evidence kinds differ: {type(baseline).__name__} vs "
            f"{type(clarified).__name__}"
        )
    if kappa <= 0:
        raise ValueError("kappa must be > 0")
    if retries < 1:
        raise ValueError("retries must be >= 1")
    saved = max(0.0, _cost_of(baseline) - _cost_of(clarified)) / kappa
    return VocEstimate(
        latency_saved=saved,
        quality_lift=quality_lift,
        effort_term=w_h * math.log2(retries),
    )


def estimate_cod(
    interaction_seconds: float = DEFAULT_INTERACTION_SECONDS,
    user_time_rate: float = DEFAULT_USER_TIME_RATE,
    llm_call_cost: float = DEFAULT_LLM_CALL_COST,
) -> CodEstimate:
    """Seconds-equivalent cost of one dialogue turn."""
    if min(interaction_seconds, user_time_rate, llm_call_cost) < 0:
        raise ValueError("dialogue cost parameters must be >= 0")
    return CodEstimate(
        interaction_seconds=interaction_seconds * user_time_rate,
        llm_call_cost=llm_call_cost,
    )


def decide(
    voc: VocEstimate,
    cod: CodEstimate,
    m: float,
    slack: float = DEFAULT_SLACK,
) -> ClarificationDecision:
    """ask iff VoC.total > CoD * (1 + slack) and the facet confidence m >= 0.5."""
    ask = voc.total > cod.total * (1.0 + slack) and m >= M_THRESHOLD
    return ClarificationDecision(ask=ask, voc=voc, cod=cod, m=m, slack=slack)


def estimate_retries(combined_ambiguity: float) -> int:
    """N = clamp(round(1 + 4*ambiguity), 1, 5), rounding half up."""
    if not 0.0 <= combined_ambiguity <= 1.0:
        raise ValueError("ambiguity must be in [0,1]")
    n = int(math.floor(1.0 + 4.0 * combined_ambiguity + 0.5))
    return max(1, min(MAX_RETRIES, n))
