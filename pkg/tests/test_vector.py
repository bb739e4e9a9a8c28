"""Vector indexes: build determinism, search exactness, filtering, recall."""

import numpy as np
import pytest

from clarq.vector import (
    EmbeddingCorpus,
    brute_force_search,
    build_hnsw,
    build_ivf,
    load_corpus_jsonl,
    recall_at_k,
    save_corpus_jsonl,
    search,
)


def make_corpus(rng, n=300, clusters=6, dim=8, sigma=0.04):
    cents = rng.uniform(0, 1, size=(clusters, dim))
    vectors, keywords, labels = [], [], []
    per = n // clusters
    for c in range(clusters):
        vectors.append(cents[c] + rng.normal(0, sigma, (per, dim)))
        keywords += [frozenset({f"tag{c}"})] * per
        labels += [c] * per
    return EmbeddingCorpus(dim=dim, vectors=np.vstack(vectors),
                           ids=list(range(per * clusters)),
                           keywords=keywords, labels=labels)


class TestCorpus:
    def test_duplicate_ids_rejected(self, rng):
        with pytest.raises(ValueError, match="unique"):
            EmbeddingCorpus(dim=2, vectors=rng.normal(size=(2, 2)),
                            ids=[1, 1], keywords=[frozenset(), frozenset()])

    def test_jsonl_round_trip(self, rng, tmp_path):
        corpus = make_corpus(rng, n=60, clusters=3, dim=4)
        path = tmp_path / "c.jsonl"
        save_corpus_jsonl(corpus, path)
        loaded = load_corpus_jsonl(path)
        assert loaded.dim == corpus.dim
        assert loaded.ids == corpus.ids
        assert np.array_equal(loaded.vectors, corpus.vectors)
        assert loaded.keywords == corpus.keywords
        assert loaded.labels == corpus.labels

    def test_posting_fraction(self, rng):
        corpus = make_corpus(rng, n=60, clusters=3, dim=4)
        assert corpus.posting_fraction("tag0") == pytest.approx(1 / 3)
        assert corpus.posting_fraction("nosuch") == 0.0

    def test_mean_pairwise_matches_direct(self, rng):
        corpus = make_corpus(rng, n=40, clusters=2, dim=4)
        direct = []
        v = corpus.vectors
        for i in range(len(v)):
            for j in range(len(v)):
                if i != j:
                    direct.append(float(((v[i] - v[j]) ** 2).sum()))
        assert corpus.mean_pairwise_sq() == pytest.approx(np.mean(direct))


class TestIvf:
    def test_each_distant_point_its_own_centroid(self):
        pts = np.eye(12) * 100.0
        corpus = EmbeddingCorpus(dim=12, vectors=pts, ids=list(range(12)),
                                 keywords=[frozenset()] * 12)
        index = build_ivf(corpus, nlist=12, seed=3)
        assert sorted(index.list_sizes()) == [1] * 12

    def test_determinism(self, rng):
        corpus = make_corpus(rng)
        a = build_ivf(corpus, nlist=6, seed=11)
        b = build_ivf(corpus, nlist=6, seed=11)
        assert all(np.array_equal(x, y)
                   for x, y in zip(a.posting_lists, b.posting_lists))
        assert np.array_equal(a.centroids, b.centroids)

    def test_posting_lists_partition_corpus(self, rng):
        corpus = make_corpus(rng)
        index = build_ivf(corpus, nlist=6, seed=11)
        all_docs = np.concatenate(index.posting_lists)
        assert len(all_docs) == len(corpus)
        assert len(set(all_docs.tolist())) == len(corpus)

    def test_cluster_recovery_on_big_corpus(self, big_corpus, big_ivf):
        labels = np.asarray(big_corpus.labels)
        co_listed = 0
        for posting in big_ivf.posting_lists:
            if len(posting) == 0:
                continue
            member_labels = labels[posting]
            majority = np.bincount(member_labels).argmax()
            co_listed += int((member_labels == majority).sum())
        assert co_listed / len(big_corpus) >= 0.90

    def test_nlist_validation(self, rng):
        corpus = make_corpus(rng, n=30, clusters=3)
        with pytest.raises(ValueError):
            build_ivf(corpus, nlist=0, seed=1)
        with pytest.raises(ValueError):
            build_ivf(corpus, nlist=31, seed=1)


class TestHnsw:
    def test_single_point(self):
        corpus = EmbeddingCorpus(dim=3, vectors=np.zeros((1, 3)), ids=[0],
                                 keywords=[frozenset()])
        index = build_hnsw(corpus, M=4, ef_construction=8, seed=1)
        assert index.entry_point == 0
        assert index.layers[0][0] == []

    def test_determinism(self, rng):
        corpus = make_corpus(rng)
        a = build_hnsw(corpus, M=8, ef_construction=32, seed=2)
        b = build_hnsw(corpus, M=8, ef_construction=32, seed=2)
        assert a.layers == b.layers
        assert a.entry_point == b.entry_point

    def test_degree_caps(self, rng):
        corpus = make_corpus(rng)
        index = build_hnsw(corpus, M=4, ef_construction=32, seed=2)
        for level, adj in enumerate(index.layers):
            cap = 8 if level == 0 else 4
            for node, nbs in adj.items():
                assert len(nbs) <= cap, (level, node)

    def test_level0_contains_all_and_connected(self, rng):
        corpus = make_corpus(rng)
        index = build_hnsw(corpus, M=4, ef_construction=16, seed=5)
        assert set(index.layers[0]) == set(range(len(corpus)))
        seen = {index.entry_point}
        frontier = [index.entry_point]
        while frontier:
            cur = frontier.pop()
            for nb in index.layers[0][cur]:
                if nb not in seen:
                    seen.add(nb)
                    frontier.append(nb)
        assert len(seen) == len(corpus)

    def test_stored_vector_found_at_rank_one(self, rng):
        corpus = make_corpus(rng)
        index = build_hnsw(corpus, M=8, ef_construction=32, seed=2)
        hits, _ = search(index, corpus.vectors[123], 5, ef_search=16)
        assert hits[0].id == 123
        assert hits[0].distance == 0.0

    def test_m_validation(self, rng):
        corpus = make_corpus(rng, n=12, clusters=2)
        with pytest.raises(ValueError):
            build_hnsw(corpus, M=1, ef_construction=8, seed=1)


class TestSearch:
    def test_ivf_exhaustive_equals_brute_force(self, rng):
        corpus = make_corpus(rng)
        index = build_ivf(corpus, nlist=6, seed=11)
        for _ in range(10):
            q = rng.uniform(0, 1, corpus.dim)
            hits, stats = search(index, q, 10, nprobe=6)
            bf = brute_force_search(corpus, q, 10)
            assert [(h.id, h.distance) for h in hits] == \
                [(h.id, h.distance) for h in bf]
            assert stats.candidates_scanned == len(corpus)

    def test_hnsw_exhaustive_equals_brute_force(self, rng):
        corpus = make_corpus(rng)
        index = build_hnsw(corpus, M=8, ef_construction=32, seed=2)
        for _ in range(10):
            q = rng.uniform(0, 1, corpus.dim)
            hits, _ = search(index, q, 10, ef_search=len(corpus))
            bf = brute_force_search(corpus, q, 10)
            assert [h.id for h in hits] == [h.id for h in bf]

    def test_probe_at_cluster_center_stays_in_one_list(self, rng):
        corpus = make_corpus(rng)
        index = build_ivf(corpus, nlist=6, seed=11)
        q = index.centroids[2]
        hits, stats = search(index, q, 5, nprobe=1)
        assert stats.lists_probed == 1
        members = set(index.posting_lists[
            int(np.argmin(((index.centroids - q) ** 2).sum(1)))].tolist())
        assert all(h.pos in members for h in hits)

    def test_zero_match_filter(self, rng):
        corpus = make_corpus(rng)
        index = build_ivf(corpus, nlist=6, seed=11)
        hits, stats = search(index, rng.uniform(0, 1, corpus.dim), 5,
                             nprobe=2, keyword_filter="nosuch")
        assert hits == []
        assert stats.filtered_out == stats.candidates_scanned

    def test_filter_hits_carry_keyword(self, rng):
        corpus = make_corpus(rng)
        index = build_ivf(corpus, nlist=6, seed=11)
        q = rng.uniform(0, 1, corpus.dim)
        hits, _ = search(index, q, 8, nprobe=2, keyword_filter="tag3")
        assert hits, "expected tag3 hits"
        assert all("tag3" in corpus.keywords[h.pos] for h in hits)
        unfiltered, _ = search(index, q, len(corpus), nprobe=6)
        universe = {h.id for h in unfiltered}
        assert {h.id for h in hits} <= universe

    def test_k_larger_than_corpus(self, rng):
        corpus = make_corpus(rng, n=30, clusters=3)
        index = build_ivf(corpus, nlist=3, seed=1)
        hits, _ = search(index, rng.uniform(0, 1, corpus.dim), 100, nprobe=3)
        assert len(hits) == 30

    def test_filter_with_fewer_matches_than_k_terminates(self, rng):
        corpus = make_corpus(rng)  # 50 docs per tag
        for build, params in (
            (lambda: build_ivf(corpus, nlist=6, seed=11), {"nprobe": 1}),
            (lambda: build_hnsw(corpus, M=8, ef_construction=32, seed=2),
             {"ef_search": 16}),
        ):
            index = build()
            hits, _ = search(index, rng.uniform(0, 1, corpus.dim), 200,
                             keyword_filter="tag4", **params)
            assert len(hits) == 50
            assert all("tag4" in corpus.keywords[h.pos] for h in hits)

    def test_recall_monotone_in_nprobe(self, rng):
        corpus = make_corpus(rng, n=600, clusters=6)
        index = build_ivf(corpus, nlist=6, seed=11)
        q = rng.uniform(0, 1, corpus.dim)
        truth = [h.id for h in brute_force_search(corpus, q, 20)]
        last = 0.0
        for nprobe in (1, 2, 4, 6):
            hits, _ = search(index, q, 20, nprobe=nprobe)
            r = recall_at_k(hits, truth, 20)
            assert r >= last - 1e-12
            last = r
        assert last == 1.0

    def test_scanned_nondecreasing_in_nprobe(self, rng):
        corpus = make_corpus(rng)
        index = build_ivf(corpus, nlist=6, seed=11)
        q = rng.uniform(0, 1, corpus.dim)
        scans = [search(index, q, 5, nprobe=p)[1].candidates_scanned
                 for p in (1, 2, 3, 6)]
        assert scans == sorted(scans)

    def test_hnsw_scanned_nondecreasing_in_ef(self, rng):
        corpus = make_corpus(rng)
        index = build_hnsw(corpus, M=8, ef_construction=32, seed=2)
        q = rng.uniform(0, 1, corpus.dim)
        scans = [search(index, q, 5, ef_search=ef)[1].candidates_scanned
                 for ef in (8, 32, 128, 300)]
        assert scans == sorted(scans)

    def test_recall_monotone_in_ef(self, rng):
        corpus = make_corpus(rng, n=600, clusters=6)
        index = build_hnsw(corpus, M=8, ef_construction=48, seed=2)
        for trial in range(5):
            q = rng.uniform(0, 1, corpus.dim)
            truth = [h.id for h in brute_force_search(corpus, q, 20)]
            last = 0.0
            for ef in (20, 60, 200, 600):
                hits, _ = search(index, q, 20, ef_search=ef)
                r = recall_at_k(hits, truth, 20)
                assert r >= last - 1e-12, (trial, ef)
                last = r
            assert last == 1.0

    def test_scanned_bounds_hits_returned(self, rng):
        corpus = make_corpus(rng)
        ivf = build_ivf(corpus, nlist=6, seed=11)
        hnsw = build_hnsw(corpus, M=8, ef_construction=32, seed=2)
        q = rng.uniform(0, 1, corpus.dim)
        for index, params in ((ivf, {"nprobe": 2}), (hnsw, {"ef_search": 32})):
            for kw in (None, "tag1"):
                hits, stats = search(index, q, 12, keyword_filter=kw, **params)
                assert stats.candidates_scanned >= len(hits)


class TestBruteForce:
    def test_identity_query(self, rng):
        corpus = make_corpus(rng)
        hits = brute_force_search(corpus, corpus.vectors[7], 3)
        assert hits[0].id == 7 and hits[0].distance == 0.0

    def test_k_equals_corpus(self, rng):
        corpus = make_corpus(rng, n=24, clusters=2)
        hits = brute_force_search(corpus, rng.uniform(0, 1, corpus.dim), 24)
        assert len(hits) == 24

    def test_matches_naive_reference(self, rng):
        corpus = make_corpus(rng, n=50, clusters=5)
        q = rng.uniform(0, 1, corpus.dim)
        naive = []
        for pos in range(len(corpus)):
            acc = 0.0
            for j in range(corpus.dim):
                diff = corpus.vectors[pos][j] - q[j]
                acc += diff * diff
            naive.append((acc, corpus.ids[pos]))
        naive.sort(key=lambda t: (t[0], t[1]))
        hits = brute_force_search(corpus, q, 10)
        assert [h.id for h in hits] == [i for _, i in naive[:10]]
        for h, (d, _) in zip(hits, naive):
            assert h.distance == pytest.approx(d)


class TestRecall:
    def test_exact_overlap(self):
        from clarq.vector.search import Hit

        hits = [Hit(i, float(i), i) for i in range(10)]
        assert recall_at_k(hits, list(range(10)), 10) == 1.0
        assert recall_at_k(hits, list(range(100, 110)), 10) == 0.0
        assert recall_at_k(hits, [0, 1, 2, 3, 4, 100, 101, 102, 103, 104], 10) == 0.5

    def test_empty_truth_errors(self):
        with pytest.raises(ValueError):
            recall_at_k([], [], 10)
