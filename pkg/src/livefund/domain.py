"""Shared domain types and their canonical JSON form.

All values are immutable. Money is carried as :class:`decimal.Decimal` so
ledger arithmetic is exact and replay output is byte-stable; metrics convert
to float downstream.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field, replace
from datetime import date
from decimal import Decimal
from enum import Enum
from typing import Any, Mapping, Sequence

from livefund.errors import UnrecognizedAction, UnrecognizedDirection

SIGNAL_ERROR_TEXT = "No signal provided due to error"
DECISION_ERROR_TEXT = "Just hold due to error"

DEFAULT_MEMORY_SIZE = 5

PRICE_QUANTUM = Decimal("0.0001")
CASH_QUANTUM = Decimal("0.01")

_TICKER_RE = re.compile(r"^[A-Z.]{1,6}$")


def validate_ticker(symbol: str) -> str:
    if not isinstance(symbol, str) or not _TICKER_RE.match(symbol):
        raise ValueError(f"invalid ticker symbol: {symbol!r}")
    return symbol


def to_decimal(value: Any) -> Decimal:
    """Convert str/int/float/Decimal to Decimal without binary float noise."""
    if isinstance(value, Decimal):
        return value
    if isinstance(value, bool):
        raise TypeError("bool is not a currency amount")
    if isinstance(value, float):
        return Decimal(repr(value))
    return Decimal(value)


def to_price(value: Any) -> Decimal:
    """Round to 4-digit price precision, dropping trailing zeros."""
    return to_decimal(value).quantize(PRICE_QUANTUM).normalize()


def money_str(value: Decimal) -> str:
    """Fixed-point text form without exponent notation."""
    return format(value, "f")


class SignalDirection(str, Enum):
    BULLISH = "Bullish"
    BEARISH = "Bearish"
    NEUTRAL = "Neutral"

    def __str__(self) -> str:
        return self.value


class DecisionAction(str, Enum):
    BUY = "Buy"
    SELL = "Sell"
    HOLD = "Hold"

    def __str__(self) -> str:
        return self.value


class AnalystKind(str, Enum):
    TECHNICAL = "Technical"
    FUNDAMENTAL = "Fundamental"
    INSIDER = "Insider"
    COMPANY_NEWS = "CompanyNews"
    MACRO_ECONOMIC = "MacroEconomic"
    POLICY = "Policy"

    def __str__(self) -> str:
        return self.value

    @property
    def label(self) -> str:
        return _ANALYST_LABELS[self]

    @classmethod
    def parse(cls, text: str) -> "AnalystKind":
        key = re.sub(r"[\s_\-]+", "", str(text)).casefold()
        key = key.removesuffix("analyst")
        for kind in cls:
            if kind.value.casefold() == key:
                return kind
        raise ValueError(f"unknown analyst kind: {text!r}")


_ANALYST_LABELS = {
    AnalystKind.TECHNICAL: "Technical",
    AnalystKind.FUNDAMENTAL: "Fundamental",
    AnalystKind.INSIDER: "Insider",
    AnalystKind.COMPANY_NEWS: "Company News",
    AnalystKind.MACRO_ECONOMIC: "Macro Economic",
    AnalystKind.POLICY: "Policy",
}


def parse_direction(text: str) -> SignalDirection:
    key = str(text).strip().casefold()
    for d in SignalDirection:
        if d.value.casefold() == key:
            return d
    raise UnrecognizedDirection(f"not a signal direction: {text!r}")


def parse_action(text: str) -> DecisionAction:
    key = str(text).strip().casefold()
    for a in DecisionAction:
        if a.value.casefold() == key:
            return a
    raise UnrecognizedAction(f"not a decision action: {text!r}")


@dataclass(frozen=True)
class Signal:
    analyst: AnalystKind
    ticker: str
    date: date
    direction: SignalDirection
    justification: str
    valid: bool = True

    def __post_init__(self):
        validate_ticker(self.ticker)
        if self.valid and not self.justification.strip():
            raise ValueError("a valid signal needs a non-empty justification")
        if not self.valid and (
            self.direction is not SignalDirection.NEUTRAL or self.justification != SIGNAL_ERROR_TEXT
        ):
            raise ValueError("invalid signals must use the Neutral/error sentinel")

    @classmethod
    def fallback(cls, analyst: AnalystKind, ticker: str, day: date) -> "Signal":
        return cls(analyst, ticker, day, SignalDirection.NEUTRAL, SIGNAL_ERROR_TEXT, valid=False)

    def to_dict(self) -> dict:
        return {
            "analyst": self.analyst.value,
            "ticker": self.ticker,
            "date": self.date.isoformat(),
            "direction": self.direction.value,
            "justification": self.justification,
            "valid": self.valid,
        }

    @classmethod
    def from_dict(cls, d: Mapping) -> "Signal":
        return cls(
            analyst=AnalystKind(d["analyst"]),
            ticker=d["ticker"],
            date=date.fromisoformat(d["date"]),
            direction=SignalDirection(d["direction"]),
            justification=d["justification"],
            valid=bool(d["valid"]),
        )


@dataclass(frozen=True)
class Decision:
    ticker: str
    date: date
    action: DecisionAction
    shares: int
    price: Decimal
    justification: str
    valid: bool = True

    def __post_init__(self):
        validate_ticker(self.ticker)
        object.__setattr__(self, "price", to_decimal(self.price))
        if not isinstance(self.shares, int) or isinstance(self.shares, bool):
            raise TypeError("shares must be an integer")
        if self.price <= 0:
            raise ValueError("decision price must be positive")
        if self.action is DecisionAction.HOLD and self.shares != 0:
            raise ValueError("Hold decisions carry zero shares")
        if self.action is not DecisionAction.HOLD and self.shares < 1:
            raise ValueError(f"{self.action.value} decisions need at least one share")
        if not self.valid and (
            self.action is not DecisionAction.HOLD or self.justification != DECISION_ERROR_TEXT
        ):
            raise ValueError("invalid decisions must use the Hold/error sentinel")

    @classmethod
    def fallback(cls, ticker: str, day: date, price: Decimal) -> "Decision":
        return cls(ticker, day, DecisionAction.HOLD, 0, price, DECISION_ERROR_TEXT, valid=False)

    def describe(self) -> str:
        if self.action is DecisionAction.HOLD:
            return "Hold"
        unit = "share" if self.shares == 1 else "shares"
        return f"{self.action.value} {self.shares} {unit}"

    def to_dict(self) -> dict:
        return {
            "ticker": self.ticker,
            "date": self.date.isoformat(),
            "action": self.action.value,
            "shares": self.shares,
            "price": money_str(self.price),
            "justification": self.justification,
            "valid": self.valid,
        }

    @classmethod
    def from_dict(cls, d: Mapping) -> "Decision":
        return cls(
            ticker=d["ticker"],
            date=date.fromisoformat(d["date"]),
            action=DecisionAction(d["action"]),
            shares=int(d["shares"]),
            price=Decimal(d["price"]),
            justification=d["justification"],
            valid=bool(d["valid"]),
        )


@dataclass(frozen=True)
class Position:
    ticker: str
    shares: int = 0
    cost_basis: Decimal = Decimal(0)

    def __post_init__(self):
        validate_ticker(self.ticker)
        object.__setattr__(self, "cost_basis", to_decimal(self.cost_basis))
        if self.shares < 0:
            raise ValueError("short positions are not supported")
        if self.cost_basis < 0:
            raise ValueError("cost basis cannot be negative")
        if self.shares == 0 and self.cost_basis != 0:
            raise ValueError("an empty position has zero cost basis")

    def to_dict(self) -> dict:
        return {"ticker": self.ticker, "shares": self.shares, "cost_basis": money_str(self.cost_basis)}

    @classmethod
    def from_dict(cls, d: Mapping) -> "Position":
        return cls(d["ticker"], int(d["shares"]), Decimal(d["cost_basis"]))


@dataclass(frozen=True)
class Portfolio:
    cash: Decimal
    positions: Mapping[str, Position] = field(default_factory=dict)
    as_of: date | None = None

    def __post_init__(self):
        object.__setattr__(self, "cash", to_decimal(self.cash))
        object.__setattr__(self, "positions", dict(sorted(self.positions.items())))
        if self.cash < 0:
            raise ValueError(f"cash went negative: {self.cash}")
        for sym, pos in self.positions.items():
            if sym != pos.ticker:
                raise ValueError(f"position keyed {sym} holds {pos.ticker}")

    def shares(self, ticker: str) -> int:
        pos = self.positions.get(ticker)
        return pos.shares if pos else 0

    def with_position(self, pos: Position, cash: Decimal) -> "Portfolio":
        positions = dict(self.positions)
        positions[pos.ticker] = pos
        return replace(self, cash=cash, positions=positions)

    def check_universe(self, universe: Sequence[str]) -> None:
        extra = set(self.positions) - set(universe)
        if extra:
            raise ValueError(f"positions outside universe: {sorted(extra)}")

    def to_dict(self) -> dict:
        return {
            "cash": money_str(self.cash),
            "positions": {k: v.to_dict() for k, v in self.positions.items()},
            "as_of": self.as_of.isoformat() if self.as_of else None,
        }

    @classmethod
    def from_dict(cls, d: Mapping) -> "Portfolio":
        return cls(
            cash=Decimal(d["cash"]),
            positions={k: Position.from_dict(v) for k, v in d["positions"].items()},
            as_of=date.fromisoformat(d["as_of"]) if d.get("as_of") else None,
        )

    def __hash__(self):
        return hash((self.cash, tuple(self.positions.items()), self.as_of))


@dataclass(frozen=True)
class TradeRecord:
    run_id: str
    date: date
    ticker: str
    action: DecisionAction
    requested_shares: int
    executed_shares: int
    price: Decimal
    cash_after: Decimal
    shares_after: int
    justification: str

    def __post_init__(self):
        object.__setattr__(self, "price", to_decimal(self.price))
        object.__setattr__(self, "cash_after", to_decimal(self.cash_after))
        if not 0 <= self.executed_shares <= max(self.requested_shares, 0):
            raise ValueError("executed shares must lie in [0, requested]")
        if self.cash_after < 0:
            raise ValueError("cash_after cannot be negative")

    def to_dict(self) -> dict:
        return {
            "run_id": self.run_id,
            "date": self.date.isoformat(),
            "ticker": self.ticker,
            "action": self.action.value,
            "requested_shares": self.requested_shares,
            "executed_shares": self.executed_shares,
            "price": money_str(self.price),
            "cash_after": money_str(self.cash_after),
            "shares_after": self.shares_after,
            "justification": self.justification,
        }

    @classmethod
    def from_dict(cls, d: Mapping) -> "TradeRecord":
        return cls(
            run_id=d["run_id"],
            date=date.fromisoformat(d["date"]),
            ticker=d["ticker"],
            action=DecisionAction(d["action"]),
            requested_shares=int(d["requested_shares"]),
            executed_shares=int(d["executed_shares"]),
            price=Decimal(d["price"]),
            cash_after=Decimal(d["cash_after"]),
            shares_after=int(d["shares_after"]),
            justification=d["justification"],
        )


def push_decision_memory(
    memory: Sequence[Decision], d: Decision, capacity: int = DEFAULT_MEMORY_SIZE
) -> tuple[Decision, ...]:
    """Return a new most-recent-first memory with ``d`` in front."""
    if capacity < 1:
        raise ValueError("memory capacity must be at least 1")
    return (d, *memory)[:capacity]


@dataclass(frozen=True)
class FundState:
    run_id: str
    trading_date: date
    portfolio: Portfolio
    signals_today: Mapping[str, tuple[Signal, ...]] = field(default_factory=dict)
    decision_memory: Mapping[str, tuple[Decision, ...]] = field(default_factory=dict)
    memory_capacity: int = DEFAULT_MEMORY_SIZE

    def __post_init__(self):
        for sigs in self.signals_today.values():
            for s in sigs:
                if s.date != self.trading_date:
                    raise ValueError("signals_today holds a signal from another date")
        for mem in self.decision_memory.values():
            if len(mem) > self.memory_capacity:
                raise ValueError("decision memory exceeds capacity")

    def memory_for(self, ticker: str) -> tuple[Decision, ...]:
        return tuple(self.decision_memory.get(ticker, ()))


def canonical_json(obj: Any) -> str:
    """Deterministic compact JSON used for ledger lines and fixtures."""
    return json.dumps(obj, sort_keys=True, separators=(",", ":"), ensure_ascii=False)
