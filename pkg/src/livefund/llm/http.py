"""Configuration-driven HTTP chat provider.

A profile names an endpoint, the auth header, a request style and the
dotted paths where the reply text and token counts live in the response,
so adding a provider is a config change.
"""

from __future__ import annotations

import os
from dataclasses import dataclass
from typing import Any, Mapping

import httpx

from livefund.errors import MissingCredential
from livefund.llm.client import Completion, ModelProfile, ProviderError, RequestTag

REQUEST_STYLES = ("openai", "anthropic")


def dig(payload: Any, path: str) -> Any:
    """Follow a dotted path such as ``choices.0.message.content``."""
    cur = payload
    for part in path.split("."):
        if isinstance(cur, list):
            cur = cur[int(part)]
        else:
            cur = cur[part]
    return cur


@dataclass(frozen=True)
class HttpProfile:
    endpoint: str
    api_key_env: str
    auth_header: str = "Authorization"
    auth_prefix: str = "Bearer "
    request_style: str = "openai"
    response_path: str = "choices.0.message.content"
    prompt_tokens_path: str | None = "usage.prompt_tokens"
    completion_tokens_path: str | None = "usage.completion_tokens"
    max_tokens: int = 1024
    extra_headers: Mapping[str, str] | None = None

    def __post_init__(self):
        if self.request_style not in REQUEST_STYLES:
            raise ValueError(f"request_style must be one of {REQUEST_STYLES}")


class HttpChatProvider:
    def __init__(self, profile: HttpProfile, env: Mapping[str, str] | None = None, client: httpx.Client | None = None):
        env = os.environ if env is None else env
        key = env.get(profile.api_key_env)
        if not key:
            raise MissingCredential(f"chat endpoint {profile.endpoint} needs ${profile.api_key_env}")
        self.profile = profile
        self.api_key = key
        self.client = client or httpx.Client()

    def _body(self, model: ModelProfile, system_prompt: str, user_prompt: str) -> dict:
        if self.profile.request_style == "anthropic":
            return {
                "model": model.model_id,
                "system": system_prompt,
                "messages": [{"role": "user", "content": user_prompt}],
                "temperature": model.temperature,
                "max_tokens": self.profile.max_tokens,
            }
        return {
            "model": model.model_id,
            "messages": [
                {"role": "system", "content": system_prompt},
                {"role": "user", "content": user_prompt},
            ],
            "temperature": model.temperature,
        }

    def chat(self, model: ModelProfile, system_prompt: str, user_prompt: str, tag: RequestTag | None = None) -> Completion:
        headers = {self.profile.auth_header: f"{self.profile.auth_prefix}{self.api_key}"}
        headers.update(self.profile.extra_headers or {})
        try:
            resp = self.client.post(
                self.profile.endpoint,
                json=self._body(model, system_prompt, user_prompt),
                headers=headers,
                timeout=model.timeout,
            )
            resp.raise_for_status()
            payload = resp.json()
            text = dig(payload, self.profile.response_path)
        except (httpx.HTTPError, ValueError, KeyError, IndexError, TypeError) as exc:
            raise ProviderError(f"{type(exc).__name__}: {exc}") from exc
        if not isinstance(text, str):
            raise ProviderError("response text is not a string")

        def tokens(path):
            if not path:
                return 0
            try:
                return int(dig(payload, path))
            except (KeyError, IndexError, TypeError, ValueError):
                return 0

        return Completion(text, tokens(self.profile.prompt_tokens_path), tokens(self.profile.completion_tokens_path))
