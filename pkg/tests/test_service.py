"""HTTP JSON API surface."""

import pytest
from fastapi.testclient import TestClient

from clarq.service import create_app
from clarq.session import Pipeline

from conftest import harness_config

VAGUE = "show popular movies where year >= 1900 order by gross desc"


@pytest.fixture()
def client(registry):
    pipeline = Pipeline(registry, harness_config())
    return TestClient(create_app(pipeline))


def new_session(client) -> str:
    resp = client.post("/sessions")
    assert resp.status_code == 200
    return resp.json()["id"]


class TestSessions:
    def test_query_returns_question_for_vague_request(self, client):
        sid = new_session(client)
        resp = client.post(f"/sessions/{sid}/query", json={"text": VAGUE})
        assert resp.status_code == 200
        body = resp.json()
        assert body["outcome"] == "question"
        assert 1 <= len(body["question"]["options"]) <= 3

    def test_query_returns_results_for_specific_request(self, client):
        sid = new_session(client)
        resp = client.post(f"/sessions/{sid}/query",
                           json={"text": "count movies where year = 1999"})
        body = resp.json()
        assert body["outcome"] == "results"
        assert body["results"]["actual_rows"] == 1

    def test_answer_round_trip(self, client):
        sid = new_session(client)
        q = client.post(f"/sessions/{sid}/query", json={"text": VAGUE}).json()
        resp = client.post(f"/sessions/{sid}/answer",
                           json={"facet_id": q["question"]["facet_id"],
                                 "selected": 0})
        assert resp.status_code == 200
        body = resp.json()
        assert body["outcome"] == "results"
        assert body["metrics"]["speedup"] > 0

    def test_parse_error_is_422_with_hint(self, client):
        sid = new_session(client)
        resp = client.post(f"/sessions/{sid}/query",
                           json={"text": "show gizmos"})
        assert resp.status_code == 422
        assert "movies" in resp.json()["detail"]

    def test_bad_answer_is_400(self, client):
        sid = new_session(client)
        client.post(f"/sessions/{sid}/query", json={"text": VAGUE})
        resp = client.post(f"/sessions/{sid}/answer",
                           json={"facet_id": "col:bogus", "selected": 0})
        assert resp.status_code == 400

    def test_unknown_session_is_404(self, client):
        resp = client.post("/sessions/nope/query", json={"text": VAGUE})
        assert resp.status_code == 404

    def test_trace_exposes_decision_numbers(self, client):
        sid = new_session(client)
        client.post(f"/sessions/{sid}/query", json={"text": VAGUE})
        trace = client.get(f"/sessions/{sid}/trace").json()
        kinds = [e["kind"] for e in trace["events"]]
        assert "decision" in kinds
        decision = [e for e in trace["events"] if e["kind"] == "decision"][0]
        payload = decision["payload"]["decision"]
        assert {"ask", "voc", "cod", "m", "slack"} <= set(payload)

    def test_datasets_listing(self, client):
        body = client.get("/datasets").json()
        names = {t["name"] for t in body["tables"]}
        assert {"movies", "orders", "products", "categories"} <= names
        assert body["corpora"][0]["name"] == "papers"

    def test_vector_query_via_api(self, client, registry):
        corpus = registry.corpora["papers"].corpus
        sid = new_session(client)
        resp = client.post(f"/sessions/{sid}/query", json={
            "text": "find some recent papers about the usual subject limit 50",
            "vector": [float(v) for v in corpus.vectors[3]],
            "index": "ivf",
        })
        assert resp.status_code == 200

    def test_ui_mounted_when_built(self, registry):
        from pathlib import Path

        from clarq.harness.cli import _mount_ui
        from clarq.service import create_app
        from clarq.session import Pipeline

        dist = Path(__file__).resolve().parents[1] / "frontend" / "dist"
        if not (dist / "index.html").exists():
            pytest.skip("frontend not built")
        app = create_app(Pipeline(registry, harness_config()))
        _mount_ui(app)
        ui_client = TestClient(app)
        resp = ui_client.get("/ui/")
        assert resp.status_code == 200
        assert "<title>clarq</title>" in resp.text
