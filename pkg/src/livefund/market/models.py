"""Upstream market data records and the simulation clock."""

from __future__ import annotations

import threading
from dataclasses import dataclass
from datetime import date
from decimal import Decimal
from enum import Enum
from typing import Mapping

from livefund.domain import money_str, to_decimal, validate_ticker
from livefund.errors import ClockError


def _d(text) -> date:
    return text if isinstance(text, date) else date.fromisoformat(text)


def _opt_float(v):
    return None if v is None else float(v)


@dataclass(frozen=True)
class OHLCVBar:
    date: date
    open: Decimal
    high: Decimal
    low: Decimal
    close: Decimal
    volume: int

    def __post_init__(self):
        for name in ("open", "high", "low", "close"):
            value = to_decimal(getattr(self, name))
            if value <= 0:
                raise ValueError(f"{name} must be positive on {self.date}")
            object.__setattr__(self, name, value)
        if self.volume < 0:
            raise ValueError("volume cannot be negative")
        if not (self.low <= self.open <= self.high and self.low <= self.close <= self.high):
            raise ValueError(f"OHLC bounds violated on {self.date}: low <= open/close <= high")

    def to_dict(self) -> dict:
        return {
            "date": self.date.isoformat(),
            "open": money_str(self.open),
            "high": money_str(self.high),
            "low": money_str(self.low),
            "close": money_str(self.close),
            "volume": self.volume,
        }

    @classmethod
    def from_dict(cls, d: Mapping) -> "OHLCVBar":
        return cls(
            _d(d["date"]),
            Decimal(str(d["open"])),
            Decimal(str(d["high"])),
            Decimal(str(d["low"])),
            Decimal(str(d["close"])),
            int(d["volume"]),
        )


class NewsScope(str, Enum):
    COMPANY = "Company"
    POLICY = "Policy"


@dataclass(frozen=True)
class NewsItem:
    date: date
    headline: str
    summary: str
    source: str
    scope: NewsScope
    ticker: str | None = None

    def __post_init__(self):
        if not self.headline.strip():
            raise ValueError("news headline is empty")
        if self.scope is NewsScope.POLICY and self.ticker is not None:
            raise ValueError("policy news carries no ticker")
        if self.scope is NewsScope.COMPANY:
            validate_ticker(self.ticker)

    def to_dict(self) -> dict:
        return {
            "date": self.date.isoformat(),
            "headline": self.headline,
            "summary": self.summary,
            "source": self.source,
            "scope": self.scope.value,
            "ticker": self.ticker,
        }

    @classmethod
    def from_dict(cls, d: Mapping) -> "NewsItem":
        return cls(
            _d(d["date"]),
            d["headline"],
            d.get("summary", ""),
            d.get("source", ""),
            NewsScope(d["scope"]),
            d.get("ticker"),
        )


class InsiderKind(str, Enum):
    BUY = "InsiderBuy"
    SELL = "InsiderSell"


@dataclass(frozen=True)
class InsiderTransaction:
    date: date
    ticker: str
    insider_name: str
    role: str
    kind: InsiderKind
    shares: int
    price: Decimal

    def __post_init__(self):
        validate_ticker(self.ticker)
        object.__setattr__(self, "price", to_decimal(self.price))
        if self.shares < 1:
            raise ValueError("insider transactions move at least one share")
        if self.price <= 0:
            raise ValueError("insider price must be positive")

    def to_dict(self) -> dict:
        return {
            "date": self.date.isoformat(),
            "ticker": self.ticker,
            "insider_name": self.insider_name,
            "role": self.role,
            "kind": self.kind.value,
            "shares": self.shares,
            "price": money_str(self.price),
        }

    @classmethod
    def from_dict(cls, d: Mapping) -> "InsiderTransaction":
        return cls(
            _d(d["date"]),
            d["ticker"],
            d["insider_name"],
            d.get("role", ""),
            InsiderKind(d["kind"]),
            int(d["shares"]),
            Decimal(str(d["price"])),
        )


@dataclass(frozen=True)
class FundamentalsSnapshot:
    ticker: str
    period_end: date
    revenue: Decimal
    net_income: Decimal
    gross_margin: float
    net_margin: float
    pe_ratio: float | None = None
    pb_ratio: float | None = None

    def __post_init__(self):
        validate_ticker(self.ticker)
        object.__setattr__(self, "revenue", to_decimal(self.revenue))
        object.__setattr__(self, "net_income", to_decimal(self.net_income))
        for name in ("gross_margin", "net_margin"):
            if not -1.0 <= getattr(self, name) <= 10.0:
                raise ValueError(f"{name} outside [-1, 10]")

    @property
    def date(self) -> date:
        return self.period_end

    def to_dict(self) -> dict:
        return {
            "ticker": self.ticker,
            "period_end": self.period_end.isoformat(),
            "revenue": money_str(self.revenue),
            "net_income": money_str(self.net_income),
            "gross_margin": self.gross_margin,
            "net_margin": self.net_margin,
            "pe_ratio": self.pe_ratio,
            "pb_ratio": self.pb_ratio,
        }

    @classmethod
    def from_dict(cls, d: Mapping) -> "FundamentalsSnapshot":
        return cls(
            d["ticker"],
            _d(d["period_end"]),
            Decimal(str(d["revenue"])),
            Decimal(str(d["net_income"])),
            float(d["gross_margin"]),
            float(d["net_margin"]),
            _opt_float(d.get("pe_ratio")),
            _opt_float(d.get("pb_ratio")),
        )


@dataclass(frozen=True)
class MacroIndicator:
    name: str
    date: date
    value: float
    unit: str = ""

    def to_dict(self) -> dict:
        return {"name": self.name, "date": self.date.isoformat(), "value": self.value, "unit": self.unit}

    @classmethod
    def from_dict(cls, d: Mapping) -> "MacroIndicator":
        return cls(d["name"], _d(d["date"]), float(d["value"]), d.get("unit", ""))


class ClockMode(str, Enum):
    LIVE = "Live"
    REPLAY = "Replay"


class SimulationClock:
    """Forward-only simulation date.

    In live mode the date may never pass the wall-clock date, which is
    supplied by ``today`` so tests can pin it.
    """

    def __init__(self, current_date: date, mode: ClockMode = ClockMode.REPLAY, today=date.today):
        self._today = today
        self.mode = ClockMode(mode)
        self._lock = threading.Lock()
        self._check_live(current_date)
        self._current = current_date

    def _check_live(self, d: date) -> None:
        if self.mode is ClockMode.LIVE and d > self._today():
            raise ClockError(f"live clock cannot run ahead of wall clock ({d} > {self._today()})")

    @property
    def current_date(self) -> date:
        return self._current

    def advance_to(self, d: date) -> None:
        with self._lock:
            if d < self._current:
                raise ClockError(f"clock only moves forward ({d} < {self._current})")
            self._check_live(d)
            self._current = d

    def __repr__(self) -> str:
        return f"SimulationClock({self._current.isoformat()}, {self.mode.value})"
