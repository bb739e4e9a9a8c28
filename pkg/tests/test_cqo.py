"""The clarification gate: VoC, CoD, decide, retry estimation."""

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from clarq.cqo import (
    CodEstimate,
    VocEstimate,
    decide,
    estimate_cod,
    estimate_retries,
    estimate_voc,
)
from clarq.engine import ExplainReport
from clarq.vector.search import SearchStats


def report(cost: float) -> ExplainReport:
    return ExplainReport(root_cardinality=1.0, total_cost=cost,
                         max_operator_cost=cost, operators=())


class TestVoc:
    def test_single_retry_no_effort(self):
        voc = estimate_voc(report(100), report(100), w_h=1.0, retries=1,
                           kappa=10.0)
        assert voc.effort_term == 0.0

    def test_equal_costs_no_latency_saving(self):
        voc = estimate_voc(report(500), report(500), kappa=10.0)
        assert voc.latency_saved == 0.0

    def test_reference_arithmetic(self):
        voc = estimate_voc(report(1e6), report(1e5), w_h=1.0, retries=4,
                           quality_lift=0.0, kappa=1e5)
        assert voc.latency_saved == pytest.approx(9.0)
        assert voc.effort_term == pytest.approx(2.0)
        assert voc.total == pytest.approx(11.0)

    def test_clarified_worse_floors_at_zero(self):
        voc = estimate_voc(report(100), report(900), kappa=1.0)
        assert voc.latency_saved == 0.0

    def test_mismatched_evidence_kinds_error(self):
        with pytest.raises(TypeError):
            estimate_voc(report(10), SearchStats(candidates_scanned=10))

    def test_search_stats_evidence(self):
        voc = estimate_voc(SearchStats(candidates_scanned=1000),
                           SearchStats(candidates_scanned=200), kappa=100.0)
        assert voc.latency_saved == pytest.approx(8.0)

    def test_parameter_validation(self):
        with pytest.raises(ValueError):
            estimate_voc(report(1), report(1), kappa=0.0)
        with pytest.raises(ValueError):
            estimate_voc(report(1), report(1), retries=0)


class TestCod:
    def test_defaults(self):
        assert estimate_cod().total == pytest.approx(10.5)

    def test_free_user_time(self):
        cod = estimate_cod(user_time_rate=0.0)
        assert cod.total == pytest.approx(0.5)

    def test_reference_arithmetic(self):
        assert estimate_cod(8, 0.5, 0.4).total == pytest.approx(4.4)

    def test_negative_config_rejected(self):
        with pytest.raises(ValueError):
            estimate_cod(interaction_seconds=-1)


class TestDecide:
    def test_equal_totals_do_not_ask(self):
        voc = VocEstimate(10.5, 0, 0)
        cod = CodEstimate(10.0, 0.5)
        assert decide(voc, cod, m=0.9, slack=0.0).ask is False

    def test_slack_absorbs_marginal_wins(self):
        voc = VocEstimate(11.0, 0, 0)
        cod = CodEstimate(10.0, 0.5)
        assert decide(voc, cod, m=0.9, slack=0.05).ask is False
        assert decide(voc, cod, m=0.9, slack=0.0).ask is True

    def test_low_confidence_blocks_good_economics(self):
        voc = VocEstimate(20.0, 0, 0)
        cod = CodEstimate(10.0, 0.5)
        assert decide(voc, cod, m=0.4).ask is False

    def test_breakdown_retained(self):
        voc = VocEstimate(3.0, 1.0, 2.0)
        cod = CodEstimate(10.0, 0.5)
        d = decide(voc, cod, m=0.7)
        assert d.voc.total == pytest.approx(6.0)
        assert d.cod.total == pytest.approx(10.5)
        assert d.m == 0.7
        data = d.to_json()
        assert data["voc"]["total"] == pytest.approx(6.0)

    @given(
        voc_total=st.floats(0, 1000),
        cod_seconds=st.floats(0, 100),
        m=st.floats(0, 1),
        slack=st.floats(0, 0.5),
    )
    @settings(max_examples=300, deadline=None)
    def test_agrees_with_direct_inequality(self, voc_total, cod_seconds, m, slack):
        voc = VocEstimate(voc_total, 0, 0)
        cod = CodEstimate(cod_seconds, 0.5)
        got = decide(voc, cod, m, slack).ask
        want = (voc_total > (cod_seconds + 0.5) * (1 + slack)) and m >= 0.5
        assert got == want

    def test_monotone_in_voc(self):
        cod = CodEstimate(10.0, 0.5)
        asked = False
        for total in (1, 5, 10, 11.5, 20, 100):
            now = decide(VocEstimate(total, 0, 0), cod, 0.9).ask
            assert not (asked and not now), "ask must not flip back off"
            asked = now

    def test_zero_benefit_single_retry_never_asks(self):
        voc = estimate_voc(report(777), report(777), w_h=5.0, retries=1,
                           quality_lift=0.0, kappa=10.0)
        assert voc.total == 0.0
        assert decide(voc, estimate_cod(), m=1.0).ask is False


class TestRetries:
    @pytest.mark.parametrize("ambiguity,expected", [
        (0.0, 1), (0.5, 3), (1.0, 5), (0.25, 2), (0.75, 4), (0.1, 1),
    ])
    def test_formula(self, ambiguity, expected):
        assert estimate_retries(ambiguity) == expected

    def test_out_of_range_rejected(self):
        with pytest.raises(ValueError):
            estimate_retries(1.5)
