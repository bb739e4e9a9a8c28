"""Optional LLM adapter: strict fallback behavior, no real network."""

import pytest

from clarq.llm import LlmAdapter, from_env, llm_linguistic_score, llm_rephrase


class _Resp:
    def __init__(self, content):
        self._content = content

    def raise_for_status(self):
        pass

    def json(self):
        return {"choices": [{"message": {"content": self._content}}]}


def adapter_returning(monkeypatch, content):
    import requests

    def fake_post(url, json=None, headers=None, timeout=None):
        if isinstance(content, Exception):
            raise content
        return _Resp(content)

    monkeypatch.setattr(requests, "post", fake_post)
    return LlmAdapter(url="http://llm.test/v1/chat")


def test_disabled_without_env(monkeypatch):
    monkeypatch.delenv("CLARQ_LLM_URL", raising=False)
    assert from_env() is None


def test_enabled_via_env(monkeypatch):
    monkeypatch.setenv("CLARQ_LLM_URL", "http://llm.test")
    monkeypatch.setenv("CLARQ_LLM_KEY", "k")
    adapter = from_env()
    assert adapter is not None
    assert adapter.api_key == "k"


def test_linguistic_score_parsed(monkeypatch):
    adapter = adapter_returning(monkeypatch, "0.7")
    assert llm_linguistic_score(adapter, "some recent things") == 0.7


def test_linguistic_score_out_of_range_discarded(monkeypatch):
    adapter = adapter_returning(monkeypatch, "7.5")
    assert llm_linguistic_score(adapter, "text") is None


def test_network_failure_falls_back(monkeypatch):
    adapter = adapter_returning(monkeypatch, TimeoutError("slow"))
    assert llm_linguistic_score(adapter, "text") is None
    assert llm_rephrase(adapter, "Which one?", ("a",)) is None


def test_rephrase_keeps_single_sentences_only(monkeypatch):
    good = adapter_returning(
        monkeypatch, "To pin down successful, should we focus on the gross?")
    assert llm_rephrase(good, "Which gross do you mean: a or b?",
                        ("a", "b")) is not None
    bad = adapter_returning(monkeypatch, "Two sentences. Not allowed?")
    assert llm_rephrase(bad, "Which gross do you mean: a or b?",
                        ("a", "b")) is None


def test_pipeline_uses_rephrasing_but_keeps_options(monkeypatch, registry):
    from dataclasses import replace

    from clarq.session import Pipeline
    from conftest import harness_config

    import requests

    def fake_post(url, json=None, headers=None, timeout=None):
        prompt = json["messages"][0]["content"]
        if "vague" in prompt.lower():
            return _Resp("0.9")
        return _Resp("Could you pick the option that matches your intent?")

    monkeypatch.setattr(requests, "post", fake_post)
    cfg = replace(harness_config(), llm_enabled=True)
    pipe = Pipeline(registry, cfg, llm_adapter=LlmAdapter(url="http://t"))
    s = pipe.new_session()
    out = pipe.submit_query(
        s, "show popular movies where year >= 1900 order by gross desc")
    assert out["outcome"] == "question"
    q = out["question"]
    assert q["text"] == "Could you pick the option that matches your intent?"
    # options always come from the facet, never the LLM
    assert tuple(q["options"]) == tuple(
        s.facet.to_json()["candidates"])
