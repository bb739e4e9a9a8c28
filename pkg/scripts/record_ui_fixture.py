"""Record a real API exchange into the UI test fixture.

Runs the service in-process over the seeded synthetic datasets and captures
one clarified session (ask=true), one silent session (ask=false), and the
dataset listing, exactly as the HTTP layer returns them.

    python scripts/record_ui_fixture.py [out_path]
"""

from __future__ import annotations

import json
import sys
from pathlib import Path

from fastapi.testclient import TestClient

from clarq.catalog import Catalog
from clarq.config import CqoConfig, RunConfig, VectorConfig
from clarq.harness.synth import generate_synthetic
from clarq.service import create_app
from clarq.session import Pipeline, Registry

VAGUE = "show popular movies where year >= 1900 order by gross desc"
CHEAP = "count movies where year = 1999"


def main() -> None:
    out = Path(sys.argv[1]) if len(sys.argv) > 1 else (
        Path(__file__).resolve().parents[1] / "frontend" / "fixtures"
        / "session.json")
    data = generate_synthetic(7, "small")
    registry = Registry(Catalog())
    for t in data.tables.values():
        registry.catalog.add(t)
    registry.add_corpus("papers", data.corpus, RunConfig(
        cqo=CqoConfig(kappa=5000.0), vector=VectorConfig(nlist=50)))
    pipeline = Pipeline(registry, RunConfig(
        cqo=CqoConfig(kappa=5000.0, vector_quality_seconds=30.0),
        vector=VectorConfig(nlist=50)))
    client = TestClient(create_app(pipeline))

    fixture: dict = {"base_url": "", "datasets": client.get("/datasets").json()}

    sid = client.post("/sessions").json()["id"]
    ask_flow = {
        "session_id": sid,
        "query_text": VAGUE,
        "query_response": client.post(
            f"/sessions/{sid}/query", json={"text": VAGUE}).json(),
    }
    facet_id = ask_flow["query_response"]["question"]["facet_id"]
    ask_flow["answer_request"] = {"facet_id": facet_id, "selected": 0}
    ask_flow["answer_response"] = client.post(
        f"/sessions/{sid}/answer", json=ask_flow["answer_request"]).json()
    ask_flow["trace"] = client.get(f"/sessions/{sid}/trace").json()
    fixture["clarified_session"] = ask_flow

    sid2 = client.post("/sessions").json()["id"]
    silent_flow = {
        "session_id": sid2,
        "query_text": CHEAP,
        "query_response": client.post(
            f"/sessions/{sid2}/query", json={"text": CHEAP}).json(),
        "trace": client.get(f"/sessions/{sid2}/trace").json(),
    }
    fixture["silent_session"] = silent_flow

    out.parent.mkdir(parents=True, exist_ok=True)
    with open(out, "w", encoding="utf-8") as fh:
        json.dump(fixture, fh, indent=2, sort_keys=True)
        fh.write("\n")
    print(f"wrote {out}")


if __name__ == "__main__":
    main()
