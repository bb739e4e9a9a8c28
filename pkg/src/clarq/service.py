"""HTTP JSON API over the clarification pipeline.

POST /sessions                    -> {"id": ...}
POST /sessions/{id}/query         -> question or results outcome
POST /sessions/{id}/answer        -> results + metrics
GET  /sessions/{id}/trace         -> ordered event list
GET  /datasets                    -> registered tables and corpora
"""

from __future__ import annotations

from typing import Optional, Union

from fastapi import FastAPI, HTTPException
from pydantic import BaseModel

from .catalog import CatalogError
from .engine import ExecutionError, PlanError
from .nlq import Answer, ParseError
from .session import Pipeline, SessionError


class QueryBody(BaseModel):
    text: str
    vector: Optional[list[float]] = None
    index: str = "ivf"


class AnswerBody(BaseModel):
    facet_id: str
    selected: Union[int, str, list]


def create_app(pipeline: Pipeline) -> FastAPI:
    app = FastAPI(title="clarq", version="0.1.0")

    @app.post("/sessions")
    def create_session() -> dict:
        session = pipeline.new_session()
        return {"id": session.id}

    @app.post("/sessions/{session_id}/query")
    def submit_query(session_id: str, body: QueryBody) -> dict:
        session = _get(session_id)
        try:
            return pipeline.submit_query(
                session, body.text, query_vector=body.vector,
                index_kind=body.index)
        except ParseError as exc:
            raise HTTPException(status_code=422, detail=str(exc)) from exc
        except (PlanError, ExecutionError, CatalogError, SessionError) as exc:
            raise HTTPException(status_code=400, detail=str(exc)) from exc

    @app.post("/sessions/{session_id}/answer")
    def submit_answer(session_id: str, body: AnswerBody) -> dict:
        session = _get(session_id)
        selected = body.selected
        if isinstance(selected, list):
            selected = tuple(selected)
        try:
            return pipeline.submit_answer(
                session, Answer(facet_id=body.facet_id, selected=selected))
        except (ValueError, SessionError) as exc:
            raise HTTPException(status_code=400, detail=str(exc)) from exc

    @app.get("/sessions/{session_id}/trace")
    def get_trace(session_id: str) -> dict:
        session = _get(session_id)
        return {"id": session.id, "state": session.state,
                "events": [e.to_json() for e in session.trace]}

    @app.get("/datasets")
    def datasets() -> dict:
        return pipeline.registry.datasets_json()

    def _get(session_id: str):
        try:
            return pipeline.get_session(session_id)
        except SessionError as exc:
            raise HTTPException(status_code=404, detail=str(exc)) from exc

    return app
