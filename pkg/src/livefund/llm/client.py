"""Provider-agnostic chat completion with bounded retries and cost tracking."""

from __future__ import annotations

import logging
import threading
import time
from dataclasses import dataclass, field
import datetime as dt
from decimal import Decimal
from typing import Mapping, Protocol

from livefund.errors import LlmUnavailable

log = logging.getLogger(__name__)

DEFAULT_TEMPERATURE = 0.5
DEFAULT_MAX_RETRIES = 3


class ProviderError(Exception):
    """Transient provider failure; the client retries these."""


@dataclass(frozen=True)
class ModelProfile:
    provider_id: str
    model_id: str
    temperature: float = DEFAULT_TEMPERATURE
    max_retries: int = DEFAULT_MAX_RETRIES
    timeout: float = 60.0

    def __post_init__(self):
        if not 0 <= self.temperature <= 2:
            raise ValueError("temperature must lie in [0, 2]")
        if self.max_retries < 0:
            raise ValueError("max_retries cannot be negative")


@dataclass(frozen=True)
class RequestTag:
    """Identifies who is asking; scripted providers key their replies on it."""

    role: str
    ticker: str | None = None
    date: dt.date | None = None


@dataclass(frozen=True)
class Completion:
    text: str
    prompt_tokens: int = 0
    completion_tokens: int = 0


@dataclass(frozen=True)
class ChatExchange:
    system_prompt: str
    user_prompt: str
    response_text: str | None
    prompt_tokens: int
    completion_tokens: int
    cost_estimate: Decimal
    attempts: int

    @property
    def token_usage(self) -> tuple[int, int]:
        return self.prompt_tokens, self.completion_tokens


class ChatProvider(Protocol):
    def chat(self, profile: ModelProfile, system_prompt: str, user_prompt: str, tag: RequestTag | None) -> Completion: ...


@dataclass(frozen=True)
class ModelPrice:
    prompt_per_1k: Decimal
    completion_per_1k: Decimal

    def cost(self, prompt_tokens: int, completion_tokens: int) -> Decimal:
        return (self.prompt_per_1k * prompt_tokens + self.completion_per_1k * completion_tokens) / 1000


class TokenBucket:
    """Blocking token bucket; ``rate`` tokens per second, ``capacity`` burst."""

    def __init__(self, rate: float, capacity: float | None = None, clock=time.monotonic, sleep=time.sleep):
        if rate <= 0:
            raise ValueError("rate must be positive")
        self.rate = rate
        self.capacity = capacity if capacity is not None else max(1.0, rate)
        self.tokens = self.capacity
        self.clock = clock
        self.sleep = sleep
        self.updated = clock()
        self._lock = threading.Lock()

    def acquire(self, n: float = 1.0) -> None:
        while True:
            with self._lock:
                now = self.clock()
                self.tokens = min(self.capacity, self.tokens + (now - self.updated) * self.rate)
                self.updated = now
                if self.tokens >= n:
                    self.tokens -= n
                    return
                wait = (n - self.tokens) / self.rate
            self.sleep(wait)


@dataclass
class LlmFactory:
    """Registry of chat providers plus the shared completion loop."""

    providers: dict[str, ChatProvider] = field(default_factory=dict)
    prices: Mapping[str, ModelPrice] = field(default_factory=dict)
    limiters: dict[str, TokenBucket] = field(default_factory=dict)
    backoff: float = 0.0
    sleep: object = time.sleep

    def __post_init__(self):
        self._warned: set[str] = set()
        self._usage_lock = threading.Lock()
        self.total_cost = Decimal(0)
        self.total_calls = 0

    def register(self, provider_id: str, provider: ChatProvider, rate_limit: float | None = None) -> None:
        self.providers[provider_id] = provider
        if rate_limit:
            self.limiters[provider_id] = TokenBucket(rate_limit)

    def _price(self, model_id: str) -> ModelPrice | None:
        price = self.prices.get(model_id)
        if price is None and model_id not in self._warned:
            self._warned.add(model_id)
            log.warning("no price entry for model %s; recording zero cost", model_id)
        return price

    def complete(
        self,
        profile: ModelProfile,
        system_prompt: str,
        user_prompt: str,
        tag: RequestTag | None = None,
    ) -> ChatExchange:
        provider = self.providers.get(profile.provider_id)
        if provider is None:
            raise LlmUnavailable(f"no provider registered as {profile.provider_id!r}")
        limiter = self.limiters.get(profile.provider_id)
        last: Exception | None = None
        for attempt in range(1, profile.max_retries + 2):
            if attempt > 1 and self.backoff:
                self.sleep(self.backoff * 2 ** (attempt - 2))
            if limiter:
                limiter.acquire()
            try:
                out = provider.chat(profile, system_prompt, user_prompt, tag)
            except ProviderError as exc:
                last = exc
                log.debug("%s attempt %d failed: %s", profile.model_id, attempt, exc)
                continue
            price = self._price(profile.model_id)
            cost = price.cost(out.prompt_tokens, out.completion_tokens) if price else Decimal(0)
            with self._usage_lock:
                self.total_cost += cost
                self.total_calls += 1
            return ChatExchange(
                system_prompt, user_prompt, out.text, out.prompt_tokens, out.completion_tokens, cost, attempt
            )
        raise LlmUnavailable(f"{profile.model_id} unavailable after {profile.max_retries + 1} attempts: {last}")
