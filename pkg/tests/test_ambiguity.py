"""Ambiguity signals: vagueness, grounding, cost normalization, vector side."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from clarq.ambiguity import (
    DEFAULT_LEXICON,
    AmbiguitySignals,
    AmbiguityWeights,
    combine,
    edit_distance,
    ground_schema,
    ground_terms,
    normalize_cost,
    normalized_edit_distance,
    project_cost_signal,
    score_linguistic,
    score_vector_ambiguity,
    tokenize,
)
from clarq.catalog import Catalog, table_from_columns
from clarq.engine import ExplainReport
from clarq.vector import build_ivf, search
from clarq.vector.search import SearchStats


def report_with_cost(total, max_op=0.0):
    return ExplainReport(root_cardinality=1.0, total_cost=total,
                         max_operator_cost=max_op, operators=())


class TestLinguistic:
    def test_specific_request_scores_zero(self):
        assert score_linguistic("movies released in 1999") == 0.0

    def test_three_vague_terms(self):
        assert score_linguistic("some recent popular movies") == pytest.approx(0.6)

    def test_lexicon_tally_oracle(self):
        text = "show me successful long movies"
        hits = sum(1 for tok in tokenize(text) if tok in DEFAULT_LEXICON)
        assert score_linguistic(text) == pytest.approx(0.2 * hits)

    def test_comparative_without_number(self):
        assert score_linguistic("orders over the limit") == pytest.approx(0.2)
        assert score_linguistic("more than necessary") == pytest.approx(0.2)

    def test_comparative_with_number_is_specific(self):
        assert score_linguistic("orders over 100") == 0.0
        assert score_linguistic("more than 5 items") == 0.0

    def test_clamped_at_one(self):
        assert score_linguistic("some some some some some some") == 1.0

    def test_empty_text_errors(self):
        with pytest.raises(ValueError):
            score_linguistic("   ")


class TestGrounding:
    @pytest.fixture()
    def catalog(self):
        cat = Catalog()
        cat.add(table_from_columns("movies", [
            ("title", "text", ["Heat", "Alien", "Heat"]),
            ("rating", "real", [7.0, 8.0, 9.0]),
        ]))
        return cat

    def test_exact_column_names_fully_grounded(self, catalog):
        g, anchors = ground_schema("rating title movies", catalog)
        assert g == 1.0
        assert len(anchors) == 3

    def test_out_of_vocabulary_scores_zero(self, catalog):
        g, anchors = ground_schema("qqq zzz kwyjibo", catalog)
        assert g == 0.0
        assert anchors == ()

    def test_fuzzy_and_oracle_agreement(self, catalog):
        text = "rating of succesful films"
        g, anchors = ground_schema(text, catalog)
        universe = ["movies", "title", "rating", "Heat", "Alien"]
        terms = []
        for t in tokenize(text):
            if t not in ("of",) and t not in terms:
                terms.append(t)
        expected = 0
        for term in terms:
            for obj in universe:
                o = obj.lower()
                dist = normalized_edit_distance(term, o)
                if term in o or o in term or dist <= 0.25:
                    expected += 1
                    break
        assert g == pytest.approx(expected / len(terms))

    def test_no_key_terms_means_fully_grounded(self, catalog):
        g, _ = ground_schema("show me the all", catalog)
        assert g == 1.0

    def test_grounded_predicate_never_decreases_g(self, catalog):
        base = "show movies"
        refined = "show movies where rating = 8.0"
        g0, _ = ground_schema(base, catalog)
        g1, _ = ground_schema(refined, catalog)
        assert g1 >= g0 - 1e-12

    def test_edit_distance(self):
        assert edit_distance("kitten", "sitting") == 3
        assert edit_distance("abc", "abc") == 0
        assert normalized_edit_distance("succesful", "successful") <= 0.25


class TestCostSignal:
    def test_zero_cost(self):
        assert project_cost_signal(report_with_cost(0.0), 1e6) == 0.0

    def test_ceiling_cost(self):
        assert project_cost_signal(report_with_cost(1e6), 1e6) == 1.0

    def test_sqrt_ceiling_is_half(self):
        cn = project_cost_signal(report_with_cost(1000.0), 1e6)
        assert cn == pytest.approx(0.5, abs=1e-3)

    def test_max_operator_dominates(self):
        # c = max(total, 2 * max_op)
        a = project_cost_signal(report_with_cost(100.0, max_op=400.0), 1e6)
        b = project_cost_signal(report_with_cost(800.0, max_op=0.0), 1e6)
        assert a == pytest.approx(b)

    def test_search_stats_evidence(self):
        stats = SearchStats(candidates_scanned=500)
        assert project_cost_signal(stats, 500) == 1.0

    def test_bad_ceiling(self):
        with pytest.raises(ValueError):
            normalize_cost(10.0, 0.0)


class TestCombine:
    def test_fully_ambiguous(self):
        s = AmbiguitySignals(1.0, 0.0, 1.0)
        assert combine(s) == pytest.approx(1.0)

    def test_fully_specified(self):
        s = AmbiguitySignals(0.0, 1.0, 0.0)
        assert combine(s) == 0.0

    def test_reference_arithmetic(self):
        s = AmbiguitySignals(0.6, 0.5, 0.3)
        assert combine(s) == pytest.approx(0.50)

    def test_weights_validated(self):
        with pytest.raises(ValueError):
            AmbiguityWeights(0.5, 0.5, 0.5)
        with pytest.raises(ValueError):
            AmbiguityWeights(-0.2, 1.0, 0.2)

    @given(
        l1=st.floats(0, 1), l2=st.floats(0, 1),
        g=st.floats(0, 1), c=st.floats(0, 1),
    )
    @settings(max_examples=200, deadline=None)
    def test_monotone_in_linguistic(self, l1, l2, g, c):
        lo, hi = sorted((l1, l2))
        assert combine(AmbiguitySignals(lo, g, c)) <= \
            combine(AmbiguitySignals(hi, g, c)) + 1e-12

    @given(g1=st.floats(0, 1), g2=st.floats(0, 1), l=st.floats(0, 1),
           c=st.floats(0, 1))
    @settings(max_examples=200, deadline=None)
    def test_antitone_in_grounding(self, g1, g2, l, c):
        lo, hi = sorted((g1, g2))
        assert combine(AmbiguitySignals(l, hi, c)) <= \
            combine(AmbiguitySignals(l, lo, c)) + 1e-12


class TestVectorAmbiguity:
    def test_exact_centroid_ratio_zero(self, tiny_corpus):
        index = build_ivf(tiny_corpus, nlist=10, seed=3)
        q = index.centroids[0]
        hits, _ = search(index, q, 10, nprobe=10)
        va = score_vector_ambiguity(q, index, hits)
        assert va.boundary_ratio == 0.0

    def test_midpoint_ratio_one(self, tiny_corpus):
        index = build_ivf(tiny_corpus, nlist=10, seed=3)
        cd = ((index.centroids - index.centroids[0]) ** 2).sum(1)
        cd[0] = np.inf
        nearest = int(np.argmin(cd))
        q = (index.centroids[0] + index.centroids[nearest]) / 2.0
        hits, _ = search(index, q, 10, nprobe=10)
        va = score_vector_ambiguity(q, index, hits)
        assert va.boundary_ratio == pytest.approx(1.0)

    def test_midpoint_scores_above_centroid_on_average(self, tiny_corpus):
        index = build_ivf(tiny_corpus, nlist=10, seed=3)
        mids, cents = [], []
        for c in range(10):
            cd = ((index.centroids - index.centroids[c]) ** 2).sum(1)
            cd[c] = np.inf
            nearest = int(np.argmin(cd))
            mid = (index.centroids[c] + index.centroids[nearest]) / 2.0
            hits_m, _ = search(index, mid, 10, nprobe=10)
            mids.append(score_vector_ambiguity(mid, index, hits_m).semantic_score)
            q = index.centroids[c]
            hits_c, _ = search(index, q, 10, nprobe=10)
            cents.append(score_vector_ambiguity(q, index, hits_c).semantic_score)
        assert np.mean(mids) > np.mean(cents)

    def test_stored_vector_below_midpoint(self, tiny_corpus):
        index = build_ivf(tiny_corpus, nlist=10, seed=3)
        q_doc = tiny_corpus.vectors[17]
        hits_d, _ = search(index, q_doc, 10, nprobe=10)
        doc_score = score_vector_ambiguity(q_doc, index, hits_d).semantic_score
        cd = ((index.centroids - q_doc) ** 2).sum(1)
        order = np.argsort(cd)
        mid = (index.centroids[order[0]] + index.centroids[order[1]]) / 2.0
        hits_m, _ = search(index, mid, 10, nprobe=10)
        mid_score = score_vector_ambiguity(mid, index, hits_m).semantic_score
        assert doc_score < mid_score

    def test_needs_two_hits(self, tiny_corpus):
        index = build_ivf(tiny_corpus, nlist=10, seed=3)
        hits, _ = search(index, tiny_corpus.vectors[0], 2, nprobe=2)
        with pytest.raises(ValueError):
            score_vector_ambiguity(tiny_corpus.vectors[0], index, hits[:1])

    def test_fields_in_unit_interval(self, tiny_corpus, rng):
        index = build_ivf(tiny_corpus, nlist=10, seed=3)
        for _ in range(10):
            q = rng.uniform(0, 1, tiny_corpus.dim)
            hits, _ = search(index, q, 10, nprobe=4)
            va = score_vector_ambiguity(q, index, hits)
            assert 0.0 <= va.boundary_ratio <= 1.0
            assert 0.0 <= va.dispersion <= 1.0
            assert 0.0 <= va.semantic_score <= 1.0


class TestGroundTerms:
    def test_universe_variant(self):
        g, anchors = ground_terms("papers about genomics", ["papers", "genomics"])
        assert g == 1.0
        assert dict(anchors)["genomics"] == "genomics"
