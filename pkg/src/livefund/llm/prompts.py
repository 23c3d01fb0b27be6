"""Prompt templates for planner, analysts and portfolio manager.

Every renderer is a pure function: identical inputs give byte-identical
``(system_prompt, user_prompt)`` pairs, which keeps replay runs stable.
"""

from __future__ import annotations

from datetime import date
from decimal import Decimal
from typing import Sequence

from livefund.domain import AnalystKind, Decision, Portfolio, Signal, money_str
from livefund.errors import PayloadMismatch
from livefund.indicators import TechnicalSummary
from livefund.market.models import (
    FundamentalsSnapshot,
    InsiderTransaction,
    MacroIndicator,
    NewsItem,
    NewsScope,
)

CLOSING_LINE = "Your response should be well-reasoned and consider all aspects of the analysis."

SIGNAL_FIELDS = (
    "You must provide your analysis as a structured output with the following fields:\n"
    '- signal: One of ["Bullish", "Bearish", "Neutral"]\n'
    "- justification: A brief explanation of your analysis\n"
    "\n"
    f"{CLOSING_LINE}\n"
    'Reply with only a JSON object, for example {"signal": "Neutral", "justification": "..."}.'
)

DECISION_FIELDS = (
    "You must provide your decision as a structured output with the following fields:\n"
    '- action: One of ["Buy", "Sell", "Hold"]\n'
    "- shares: Number of shares to buy or sell, set 0 for hold\n"
    "- price: The current price of the ticker\n"
    "- justification: A brief explanation of your decision\n"
    "\n"
    f"{CLOSING_LINE}\n"
    'Reply with only a JSON object with keys "action", "shares", "price" and "justification".'
)

TRADABLE_RULES = (
    "If the value of tradable shares is positive, you can buy more shares.\n"
    "If the value of tradable shares is negative, you can sell some shares.\n"
    "If the value of tradable shares is close to 0, you can hold."
)

ANALYST_FOCUS = {
    AnalystKind.TECHNICAL: "price patterns and indicators from daily price/volume history",
    AnalystKind.FUNDAMENTAL: "financial statements: earnings, margins and valuation ratios",
    AnalystKind.INSIDER: "transactions by corporate insiders and their timing",
    AnalystKind.COMPANY_NEWS: "company-specific news: sentiment and material events",
    AnalystKind.MACRO_ECONOMIC: "economic indicators such as growth, inflation, unemployment and rates",
    AnalystKind.POLICY: "fiscal and monetary policy news and central bank communication",
}


def _news_lines(items: Sequence[NewsItem]) -> str:
    if not items:
        return "(no news available)"
    lines = []
    for n in items:
        line = f"{len(lines) + 1}. [{n.date.isoformat()}] {n.headline}"
        if n.source:
            line += f" ({n.source})"
        if n.summary:
            line += f"\n   {n.summary}"
        lines.append(line)
    return "\n".join(lines)


def _check_list(payload, item_type, kind) -> list:
    if not isinstance(payload, (list, tuple)) or not all(isinstance(p, item_type) for p in payload):
        raise PayloadMismatch(f"{kind.value} analyst expects a list of {item_type.__name__}")
    return list(payload)


def _technical(ticker: str, day: date, summary) -> tuple[str, str]:
    if not isinstance(summary, TechnicalSummary):
        raise PayloadMismatch("Technical analyst expects a TechnicalSummary")
    f = summary.fragments()
    system = (
        f"You are a technical analyst evaluating {ticker} using multiple technical analysis strategies."
    )
    user = (
        f"Ticker: {ticker}\nDate: {day.isoformat()}\n\n"
        "The following signals have been generated from our analysis:\n\n"
        f"Price Trend Analysis: {f['trend']}\n"
        f"Mean Reversion: {f['mean_reversion']}\n"
        f"RSI: {f['rsi']}\n"
        f"Volatility: {f['volatility']}\n"
        f"Volume Analysis: {f['volume']}\n"
        f"Support and Resistance Levels: {f['price_levels']}\n\n"
        f"{SIGNAL_FIELDS}"
    )
    return system, user


def _company_news(ticker: str, day: date, payload) -> tuple[str, str]:
    items = _check_list(payload, NewsItem, AnalystKind.COMPANY_NEWS)
    if any(n.scope is not NewsScope.COMPANY for n in items):
        raise PayloadMismatch("Company News analyst expects company-scoped news")
    system = f"You are a company news analyst assessing recent news about {ticker}."
    user = (
        f"Ticker: {ticker}\nDate: {day.isoformat()}\n\n"
        f"Here are the {len(items)} most recent news items for {ticker}:\n"
        f"{_news_lines(items)}\n\n"
        "Judge the sentiment and any material events for the stock's near-term outlook.\n\n"
        f"{SIGNAL_FIELDS}"
    )
    return system, user


def _policy(ticker: str, day: date, payload) -> tuple[str, str]:
    items = _check_list(payload, NewsItem, AnalystKind.POLICY)
    if any(n.scope is not NewsScope.POLICY for n in items):
        raise PayloadMismatch("Policy analyst expects policy-scoped news")
    target = ticker or "the broad US equity market"
    header = f"Ticker: {ticker}\n" if ticker else ""
    system = "You are a policy analyst interpreting fiscal and monetary policy for equity investors."
    user = (
        f"{header}Date: {day.isoformat()}\n\n"
        f"Here are the {len(items)} most recent policy news items:\n"
        f"{_news_lines(items)}\n\n"
        f"Assess how interest rates, spending, trade and regulation in this news affect {target}.\n\n"
        f"{SIGNAL_FIELDS}"
    )
    return system, user


def _insider(ticker: str, day: date, payload) -> tuple[str, str]:
    items = _check_list(payload, InsiderTransaction, AnalystKind.INSIDER)
    if items:
        body = "\n".join(
            f"{i}. [{t.date.isoformat()}] {t.insider_name} ({t.role}): "
            f"{'bought' if t.kind.value == 'InsiderBuy' else 'sold'} {t.shares} shares at {money_str(t.price)}"
            for i, t in enumerate(items, start=1)
        )
    else:
        body = "(no insider transactions reported)"
    system = f"You are an insider-activity analyst monitoring corporate insiders at {ticker}."
    user = (
        f"Ticker: {ticker}\nDate: {day.isoformat()}\n\n"
        f"Recent insider transactions:\n{body}\n\n"
        "Weigh executive buying against selling and any unusual timing.\n\n"
        f"{SIGNAL_FIELDS}"
    )
    return system, user


def _fundamental(ticker: str, day: date, payload) -> tuple[str, str]:
    if payload is not None and not isinstance(payload, FundamentalsSnapshot):
        raise PayloadMismatch("Fundamental analyst expects a FundamentalsSnapshot or None")
    if payload is None:
        body = "(no financial statements available)"
    else:
        s = payload
        body = (
            f"Period end: {s.period_end.isoformat()}\n"
            f"Revenue: {money_str(s.revenue)}\n"
            f"Net income: {money_str(s.net_income)}\n"
            f"Gross margin: {s.gross_margin * 100:.2f}%\n"
            f"Net margin: {s.net_margin * 100:.2f}%\n"
            f"P/E ratio: {'n/a' if s.pe_ratio is None else f'{s.pe_ratio:.2f}'}\n"
            f"P/B ratio: {'n/a' if s.pb_ratio is None else f'{s.pb_ratio:.2f}'}"
        )
    system = f"You are a fundamental analyst evaluating the financial health and valuation of {ticker}."
    user = (
        f"Ticker: {ticker}\nDate: {day.isoformat()}\n\n"
        f"Latest financial statements:\n{body}\n\n"
        f"{SIGNAL_FIELDS}"
    )
    return system, user


def _macro(ticker: str, day: date, payload) -> tuple[str, str]:
    items = _check_list(payload, MacroIndicator, AnalystKind.MACRO_ECONOMIC)
    if items:
        body = "\n".join(
            f"- {m.name} ({m.date.isoformat()}): {m.value:g}{(' ' + m.unit) if m.unit else ''}" for m in items
        )
    else:
        body = "(no indicators available)"
    system = "You are a macroeconomic analyst examining economic conditions for equity investors."
    user = (
        f"Ticker: {ticker}\nDate: {day.isoformat()}\n\n"
        f"Latest economic indicators:\n{body}\n\n"
        f"Assess what these conditions imply for {ticker}.\n\n"
        f"{SIGNAL_FIELDS}"
    )
    return system, user


_RENDERERS = {
    AnalystKind.TECHNICAL: _technical,
    AnalystKind.COMPANY_NEWS: _company_news,
    AnalystKind.POLICY: _policy,
    AnalystKind.INSIDER: _insider,
    AnalystKind.FUNDAMENTAL: _fundamental,
    AnalystKind.MACRO_ECONOMIC: _macro,
}


def render_analyst_prompt(kind: AnalystKind, ticker: str | None, day: date, payload) -> tuple[str, str]:
    return _RENDERERS[AnalystKind(kind)](ticker, day, payload)


def _memory_lines(memory: Sequence[Decision]) -> str:
    if not memory:
        return "no prior decisions"
    return "\n".join(
        f"- {d.date.isoformat()}: {d.describe()} at {money_str(d.price)}. {d.justification}" for d in memory
    )


def _signal_lines(signals: Sequence[Signal]) -> str:
    valid = [s for s in signals if s.valid]
    if not valid:
        return "no valid analyst signals today"
    return "\n".join(f"- {s.analyst.label} analyst: {s.direction.value}. {s.justification}" for s in valid)


def render_manager_prompt(
    ticker: str,
    decision_memory: Sequence[Decision],
    current_price: Decimal,
    holding_shares: int,
    tradable_shares: int,
    signals: Sequence[Signal],
) -> tuple[str, str]:
    if current_price <= 0:
        raise ValueError("current price must be positive")
    system = (
        "You are a portfolio manager making final trading decisions based on decision memory, "
        "and the provided optimal position ratio."
    )
    user = (
        f"Ticker: {ticker}\n\n"
        f"Here is the decision memory:\n{_memory_lines(decision_memory)}\n\n"
        f"Here are today's analyst signals:\n{_signal_lines(signals)}\n\n"
        f"Current Price: {money_str(current_price)}\n"
        f"Holding Shares: {holding_shares}\n"
        f"Tradable Shares: {int(tradable_shares)}\n\n"
        f"{TRADABLE_RULES}\n\n"
        f"{DECISION_FIELDS}"
    )
    return system, user


def render_planner_prompt(
    universe: Sequence[str], portfolio: Portfolio, available_analysts: Sequence[AnalystKind]
) -> tuple[str, str]:
    if not available_analysts:
        raise ValueError("the planner needs at least one available analyst")
    holdings = ", ".join(f"{t} {p.shares} shares" for t, p in portfolio.positions.items() if p.shares) or "none"
    roster = "\n".join(f"- {k.value}: {ANALYST_FOCUS[k]}" for k in available_analysts)
    system = (
        "You are a financial planner for an investment fund. You decide which analysts "
        "should work today given market conditions and the portfolio."
    )
    user = (
        f"Universe: {', '.join(universe)}\n"
        f"Cash: {money_str(portfolio.cash)}\n"
        f"Holdings: {holdings}\n\n"
        f"Available analysts:\n{roster}\n\n"
        "Choose the subset of available analysts to run today.\n"
        'Reply with only a JSON object of the form {"analysts": ["<name>", ...]} using the names exactly as listed.'
    )
    return system, user
