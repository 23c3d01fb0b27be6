"""Leakage-guarded data gateway over pluggable providers.

The gateway never trusts a provider's notion of time: every record a
provider returns is checked against the simulation clock, and anything dated
after it aborts the run with :class:`LeakageViolation`.
"""

from __future__ import annotations

import logging
import os
import threading
from datetime import date
from decimal import Decimal
from typing import Any, Iterable, Mapping

from livefund.errors import (
    LeakageViolation,
    MissingCredential,
    NoPriceAvailable,
    UnknownProviderKind,
    UnknownTicker,
)
from livefund.market.models import (
    FundamentalsSnapshot,
    InsiderTransaction,
    MacroIndicator,
    NewsItem,
    OHLCVBar,
    SimulationClock,
)

log = logging.getLogger(__name__)

DEFAULT_OHLCV_WINDOW = 100
DEFAULT_NEWS_COUNT = 10
DEFAULT_INSIDER_COUNT = 10
DEFAULT_MACRO_COUNT = 10


def _guard(records: Iterable, clock: SimulationClock, what: str) -> list:
    records = list(records)
    today = clock.current_date
    for rec in records:
        if rec.date > today:
            raise LeakageViolation(f"{what}: provider returned a record dated {rec.date} on simulation date {today}")
    return records


class MarketGateway:
    """Routes fetches to one provider and checks every response.

    ``cache=True`` memoizes responses per ``(query, clock date)``. Cached
    values are the already-guarded responses, so caching is transparent.
    """

    def __init__(self, provider, cache: bool = True):
        self.provider = provider
        self._cache: dict[tuple, tuple] | None = {} if cache else None
        self._lock = threading.Lock()

    @property
    def kind(self) -> str:
        return getattr(self.provider, "kind", type(self.provider).__name__)

    def _cached(self, key: tuple, compute):
        if self._cache is None:
            return list(compute())
        with self._lock:
            hit = self._cache.get(key)
        if hit is None:
            hit = tuple(compute())
            with self._lock:
                self._cache.setdefault(key, hit)
        return list(hit)

    def fetch_ohlcv(self, ticker: str, window: int, clock: SimulationClock) -> list[OHLCVBar]:
        if window < 2:
            raise ValueError("OHLCV window must be at least 2")
        d = clock.current_date

        def compute():
            bars = _guard(self.provider.ohlcv(ticker, d, window), clock, f"OHLCV {ticker}")
            bars.sort(key=lambda b: b.date)
            return bars[-window:]

        return self._cached(("ohlcv", ticker, window, d), compute)

    def fetch_company_news(self, ticker: str, count: int, clock: SimulationClock) -> list[NewsItem]:
        if count < 1:
            raise ValueError("news count must be at least 1")
        d = clock.current_date
        return self._cached(
            ("news", ticker, count, d),
            lambda: _guard(self.provider.company_news(ticker, d, count), clock, f"news {ticker}")[:count],
        )

    def fetch_policy_news(self, count: int, clock: SimulationClock) -> list[NewsItem]:
        if count < 1:
            raise ValueError("news count must be at least 1")
        d = clock.current_date
        return self._cached(
            ("policy", count, d),
            lambda: _guard(self.provider.policy_news(d, count), clock, "policy news")[:count],
        )

    def fetch_insider(self, ticker: str, count: int, clock: SimulationClock) -> list[InsiderTransaction]:
        if count < 1:
            raise ValueError("insider count must be at least 1")
        d = clock.current_date
        return self._cached(
            ("insider", ticker, count, d),
            lambda: _guard(self.provider.insider(ticker, d, count), clock, f"insider {ticker}")[:count],
        )

    def fetch_fundamentals(self, ticker: str, clock: SimulationClock) -> FundamentalsSnapshot | None:
        d = clock.current_date

        def compute():
            snaps = _guard(self.provider.fundamentals(ticker, d), clock, f"fundamentals {ticker}")
            return [max(snaps, key=lambda s: s.period_end)] if snaps else []

        found = self._cached(("fundamentals", ticker, d), compute)
        return found[0] if found else None

    def fetch_macro(self, count: int, clock: SimulationClock) -> list[MacroIndicator]:
        if count < 1:
            raise ValueError("macro count must be at least 1")
        d = clock.current_date
        return self._cached(
            ("macro", count, d),
            lambda: _guard(self.provider.macro(d, count), clock, "macro indicators")[:count],
        )

    def fetch_price(self, ticker: str, clock: SimulationClock) -> Decimal:
        """Close on the clock date, carrying the last close over non-trading days."""
        try:
            bars = self.fetch_ohlcv(ticker, 2, clock)
        except UnknownTicker as exc:
            raise NoPriceAvailable(str(exc)) from exc
        if not bars:
            raise NoPriceAvailable(f"no bar for {ticker} on or before {clock.current_date}")
        return bars[-1].close

    def trading_days(self, start: date, end: date, tickers=None) -> list[date]:
        return list(self.provider.trading_days(start, end, tickers))


def register_provider(
    kind: str,
    endpoints: Mapping[str, Any] | str | os.PathLike | None = None,
    env: Mapping[str, str] | None = None,
    cache: bool = True,
    **provider_kwargs,
) -> MarketGateway:
    """Build a gateway for a provider kind.

    ``replay`` takes a fixture directory (or ``{"fixtures": dir}``). Live
    profiles take their settings from ``endpoints`` and read the API key from
    the environment variable it names.
    """
    env = os.environ if env is None else env
    kind_key = str(kind).lower()
    if kind_key == "replay":
        from livefund.market.replay import ReplayProvider

        root = endpoints.get("fixtures") if isinstance(endpoints, Mapping) else endpoints
        if root is None:
            raise UnknownProviderKind("replay provider needs a fixture directory")
        return MarketGateway(ReplayProvider(root), cache=cache)

    if kind_key in ("alpha-vantage", "alpha-vantage-profile", "alphavantage"):
        from livefund.market.alphavantage import AlphaVantageProvider

        settings = dict(endpoints or {})
        key_var = settings.pop("api_key_env", "ALPHAVANTAGE_API_KEY")
        api_key = env.get(key_var)
        if not api_key:
            raise MissingCredential(f"live provider {kind} needs ${key_var}")
        return MarketGateway(AlphaVantageProvider(api_key=api_key, **settings, **provider_kwargs), cache=cache)

    raise UnknownProviderKind(f"unknown data provider kind: {kind!r}")
