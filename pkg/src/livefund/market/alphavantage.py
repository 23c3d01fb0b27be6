"""Live provider speaking the Alpha Vantage query API.

Only the response shapes this module reads are handled. Records are
returned as the API reports them; date checks happen in the gateway.
"""

from __future__ import annotations

import logging
import time
from datetime import date, datetime
from decimal import Decimal

import httpx

from livefund.domain import to_price
from livefund.errors import ProviderUnavailable, UnknownTicker
from livefund.market.models import (
    FundamentalsSnapshot,
    InsiderKind,
    InsiderTransaction,
    MacroIndicator,
    NewsItem,
    NewsScope,
    OHLCVBar,
)

log = logging.getLogger(__name__)

BASE_URL = "https://www.alphavantage.co/query"
POLICY_TOPICS = "economy_fiscal,economy_monetary"
MACRO_SERIES = {
    "REAL_GDP": "GDP growth",
    "CPI": "CPI",
    "UNEMPLOYMENT": "Unemployment",
    "FEDERAL_FUNDS_RATE": "Policy rate",
}


def _news_date(stamp: str) -> date:
    # "20250410T123000"
    return datetime.strptime(stamp[:8], "%Y%m%d").date()


def _num(text, default=None):
    try:
        return Decimal(str(text))
    except Exception:
        return default


class AlphaVantageProvider:
    kind = "alpha-vantage"

    def __init__(
        self,
        api_key: str,
        base_url: str = BASE_URL,
        attempts: int = 3,
        backoff: float = 1.0,
        timeout: float = 30.0,
        client: httpx.Client | None = None,
        sleep=time.sleep,
    ):
        self.api_key = api_key
        self.base_url = base_url
        self.attempts = attempts
        self.backoff = backoff
        self.client = client or httpx.Client(timeout=timeout)
        self.sleep = sleep

    def _get(self, **params) -> dict:
        params["apikey"] = self.api_key
        last: Exception | None = None
        for attempt in range(self.attempts):
            if attempt:
                self.sleep(self.backoff * 2 ** (attempt - 1))
            try:
                resp = self.client.get(self.base_url, params=params)
                resp.raise_for_status()
                payload = resp.json()
            except (httpx.HTTPError, ValueError) as exc:
                last = exc
                log.warning("alpha vantage %s attempt %d failed: %s", params.get("function"), attempt + 1, exc)
                continue
            if "Error Message" in payload:
                raise UnknownTicker(payload["Error Message"])
            if "Note" in payload or "Information" in payload:
                last = ProviderUnavailable(payload.get("Note") or payload.get("Information"))
                log.warning("alpha vantage throttled: %s", last)
                continue
            return payload
        raise ProviderUnavailable(f"alpha vantage {params.get('function')} failed after {self.attempts} attempts: {last}")

    def ohlcv(self, ticker: str, as_of: date, window: int) -> list[OHLCVBar]:
        size = "compact" if window <= 100 else "full"
        payload = self._get(function="TIME_SERIES_DAILY", symbol=ticker, outputsize=size)
        series = payload.get("Time Series (Daily)")
        if series is None:
            raise UnknownTicker(f"no daily series for {ticker}")
        bars = [
            OHLCVBar(
                date.fromisoformat(day),
                to_price(row["1. open"]),
                to_price(row["2. high"]),
                to_price(row["3. low"]),
                to_price(row["4. close"]),
                int(float(row["5. volume"])),
            )
            for day, row in series.items()
        ]
        bars.sort(key=lambda b: b.date)
        return bars[-window:]

    def _news(self, scope: NewsScope, ticker: str | None, count: int, **query) -> list[NewsItem]:
        payload = self._get(function="NEWS_SENTIMENT", sort="LATEST", limit=max(count, 50), **query)
        items = [
            NewsItem(
                _news_date(row["time_published"]),
                row["title"],
                row.get("summary", ""),
                row.get("source", ""),
                scope,
                ticker,
            )
            for row in payload.get("feed", [])
            if row.get("title")
        ]
        items.sort(key=lambda n: n.date, reverse=True)
        return items[:count]

    def company_news(self, ticker: str, as_of: date, count: int) -> list[NewsItem]:
        return self._news(NewsScope.COMPANY, ticker, count, tickers=ticker)

    def policy_news(self, as_of: date, count: int) -> list[NewsItem]:
        return self._news(NewsScope.POLICY, None, count, topics=POLICY_TOPICS)

    def insider(self, ticker: str, as_of: date, count: int) -> list[InsiderTransaction]:
        payload = self._get(function="INSIDER_TRANSACTIONS", symbol=ticker)
        out = []
        for row in payload.get("data", []):
            shares = int(float(row.get("shares") or 0))
            price = _num(row.get("share_price"), Decimal(0))
            if shares < 1 or price <= 0:
                continue
            out.append(
                InsiderTransaction(
                    date.fromisoformat(row["transaction_date"]),
                    ticker,
                    row.get("executive", ""),
                    row.get("executive_title", ""),
                    InsiderKind.BUY if row.get("acquisition_or_disposal") == "A" else InsiderKind.SELL,
                    shares,
                    to_price(price),
                )
            )
        out.sort(key=lambda t: t.date, reverse=True)
        return out[:count]

    def fundamentals(self, ticker: str, as_of: date) -> list[FundamentalsSnapshot]:
        payload = self._get(function="INCOME_STATEMENT", symbol=ticker)
        snaps = []
        for row in payload.get("quarterlyReports", []):
            revenue = _num(row.get("totalRevenue"))
            net = _num(row.get("netIncome"))
            gross = _num(row.get("grossProfit"))
            if revenue is None or net is None or not revenue:
                continue
            snaps.append(
                FundamentalsSnapshot(
                    ticker,
                    date.fromisoformat(row["fiscalDateEnding"]),
                    revenue,
                    net,
                    float(gross / revenue) if gross is not None else 0.0,
                    float(net / revenue),
                )
            )
        return snaps

    def macro(self, as_of: date, count: int) -> list[MacroIndicator]:
        out = []
        for function, name in MACRO_SERIES.items():
            payload = self._get(function=function)
            unit = payload.get("unit", "")
            for row in payload.get("data", [])[:count]:
                value = _num(row.get("value"))
                if value is not None:
                    out.append(MacroIndicator(name, date.fromisoformat(row["date"]), float(value), unit))
        out.sort(key=lambda m: (m.date, m.name), reverse=True)
        return out[:count]

    def trading_days(self, start: date, end: date, tickers=None) -> list[date]:
        probe = (tickers or ["SPY"])[0]
        bars = self.ohlcv(probe, end, 10_000)
        return [b.date for b in bars if start <= b.date <= end]
