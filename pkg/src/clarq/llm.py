"""Optional LLM adapter (chat-completions style HTTP endpoint).

Disabled unless CLARQ_LLM_URL is set. Every failure path (network, timeout,
bad payload) returns None so callers fall back to the deterministic
heuristics; the acceptance suite never touches this module's network path.
"""

from __future__ import annotations

import json
import os
import re
from dataclasses import dataclass
from typing import Optional

URL_ENV = "CLARQ_LLM_URL"
KEY_ENV = "CLARQ_LLM_KEY"
MODEL_ENV = "CLARQ_LLM_MODEL"
DEFAULT_TIMEOUT = 5.0


@dataclass
class LlmAdapter:
    url: str
    api_key: str = ""
    model: str = "default"
    timeout: float = DEFAULT_TIMEOUT

    def complete(self, prompt: str) -> Optional[str]:
        import requests

        headers = {"Content-Type": "application/json"}
        if self.api_key:
            headers["Authorization"] = f"Bearer {self.api_key}"
        body = {
            "model": self.model,
            "messages": [{"role": "user", "content": prompt}],
        }
        try:
            resp = requests.post(self.url, json=body, headers=headers,
                                 timeout=self.timeout)
            resp.raise_for_status()
            data = resp.json()
            return data["choices"][0]["message"]["content"]
        except Exception:
            return None


def from_env() -> Optional[LlmAdapter]:
    url = os.environ.get(URL_ENV, "").strip()
    if not url:
        return None
    return LlmAdapter(
        url=url,
        api_key=os.environ.get(KEY_ENV, ""),
        model=os.environ.get(MODEL_ENV, "default"),
    )


VAGUENESS_PROMPT = (
    "Rate how vague this data request is on a scale from 0.0 (clear and "
    "specific) to 1.0 (highly underspecified). Reply with only the number.\n"
    "Request: {text}"
)


def llm_linguistic_score(adapter: LlmAdapter, text: str) -> Optional[float]:
    """Vagueness score from the LLM; None on any failure."""
    reply = adapter.complete(VAGUENESS_PROMPT.format(text=text))
    if reply is None:
        return None
    m = re.search(r"\d*\.?\d+", reply)
    if not m:
        return None
    try:
        v = float(m.group())
    except ValueError:
        return None
    return v if 0.0 <= v <= 1.0 else None


REPHRASE_PROMPT = (
    "Rewrite this clarifying question as one friendly sentence, keeping the "
    "listed options unchanged and in order.\nQuestion: {text}\nOptions: {options}"
)


def llm_rephrase(adapter: LlmAdapter, question_text: str,
                 options: tuple) -> Optional[str]:
    """Single-sentence rephrasing; None (keep the template) on any failure."""
    reply = adapter.complete(REPHRASE_PROMPT.format(
        text=question_text, options=json.dumps(list(options))))
    if reply is None:
        return None
    reply = reply.strip()
    from .nlq import is_single_sentence

    return reply if reply and is_single_sentence(reply) else None
