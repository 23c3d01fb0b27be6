"""Synthetic replay fixtures for offline runs and tests.

The bundled fixture set is produced by :func:`generate` with the default
seed. Prices follow a one-factor model: a market return (with a scripted
sell-off and rebound in early April 2025) times a per-ticker beta plus
idiosyncratic noise. A handful of closes are pinned so scenario tests can
rely on exact prices. News, insider filings, fundamentals and macro series
are drawn from small template banks.

Regenerate with ``python3 -m livefund.synth <dir>``.
"""

from __future__ import annotations

import json
import sys
from dataclasses import dataclass, field
from datetime import date, timedelta
from decimal import ROUND_CEILING, ROUND_FLOOR, Decimal
from pathlib import Path

import numpy as np

from livefund.market.replay import MACRO_DIR, MANIFEST, POLICY_DIR

NYSE_HOLIDAYS = frozenset(
    {
        date(2024, 11, 28),
        date(2024, 12, 25),
        date(2025, 1, 1),
        date(2025, 1, 9),
        date(2025, 1, 20),
        date(2025, 2, 17),
        date(2025, 4, 18),
    }
)

CENT = Decimal("0.01")


def trading_calendar(start: date, end: date, holidays=NYSE_HOLIDAYS) -> list[date]:
    days, d = [], start
    while d <= end:
        if d.weekday() < 5 and d not in holidays:
            days.append(d)
        d += timedelta(days=1)
    return days


@dataclass(frozen=True)
class TickerModel:
    name: str
    start_price: float
    beta: float
    idio_vol: float
    base_volume: int
    revenue_bn: float
    gross_margin: float
    net_margin: float
    pins: dict = field(default_factory=dict)


CVX_PINS = {
    date(2025, 3, 28): Decimal("166.47"),
    date(2025, 3, 31): Decimal("168.51"),
    date(2025, 4, 1): Decimal("167.29"),
    date(2025, 4, 2): Decimal("166.06"),
    date(2025, 4, 3): Decimal("156.12"),
}

DEFAULT_TICKERS = {
    "AAPL": TickerModel("Apple", 225.0, 1.2, 0.012, 55_000_000, 124.3, 0.469, 0.289),
    "AXP": TickerModel("American Express", 270.0, 1.1, 0.013, 3_200_000, 17.2, 0.62, 0.146),
    "BAC": TickerModel("Bank of America", 42.0, 1.15, 0.012, 38_000_000, 25.3, 0.58, 0.266),
    "KO": TickerModel("Coca-Cola", 70.0, 0.5, 0.008, 14_000_000, 11.5, 0.594, 0.191),
    "CVX": TickerModel("Chevron", 160.0, 0.9, 0.013, 8_500_000, 52.2, 0.31, 0.062, CVX_PINS),
}
BENCHMARK = "SPY"
BENCHMARK_MODEL = TickerModel("S&P 500 ETF", 570.0, 1.0, 0.0, 45_000_000, 0, 0, 0)

MARKET_SHOCKS = {
    date(2025, 4, 3): -0.048,
    date(2025, 4, 4): -0.060,
    date(2025, 4, 7): -0.002,
    date(2025, 4, 8): -0.016,
    date(2025, 4, 9): 0.095,
    date(2025, 4, 10): -0.035,
    date(2025, 4, 11): 0.018,
    date(2025, 4, 14): 0.008,
    date(2025, 4, 15): -0.002,
    date(2025, 4, 16): -0.022,
    date(2025, 4, 17): 0.001,
}

POLICY_NEWS = [
    (date(2025, 1, 29), "Fed leaves benchmark rate unchanged at 4.25%-4.50%", "Officials said they are in no hurry to cut further.", "Central Bank Wire"),
    (date(2025, 2, 12), "Hotter January inflation print tempers rate-cut hopes", "Core prices rose more than forecast.", "Macro Daily"),
    (date(2025, 3, 4), "New tariffs on Canada and Mexico take effect", "Duties of 25% apply to a wide range of imports.", "Trade Desk"),
    (date(2025, 3, 19), "Fed holds rates steady and still projects two cuts this year", "Growth forecasts were trimmed while inflation projections rose.", "Central Bank Wire"),
    (date(2025, 3, 26), "Treasury outlines spending review ahead of budget talks", "Lawmakers debate the size of discretionary cuts.", "Fiscal Monitor"),
    (date(2025, 4, 2), "White House announces sweeping reciprocal tariffs on trading partners", "A 10% baseline duty applies with higher rates for dozens of countries.", "Trade Desk"),
    (date(2025, 4, 4), "China retaliates with 34% tariffs on all US goods", "Beijing also restricts exports of some rare earths.", "Trade Desk"),
    (date(2025, 4, 7), "Officials rule out delay as tariff deadline nears", "Markets swing on conflicting reports about a pause.", "Policy Brief"),
    (date(2025, 4, 9), "White House announces 90-day pause on reciprocal tariffs for most countries", "The baseline 10% duty stays; China is excluded from the pause.", "Trade Desk"),
    (date(2025, 4, 10), "Tariff pause lifts sentiment as trade talks begin with allies", "Negotiators from several countries schedule meetings in Washington.", "Policy Brief"),
    (date(2025, 4, 10), "US raises duties on Chinese imports to a combined 145%", "The increase stacks on earlier fentanyl-related tariffs.", "Trade Desk"),
    (date(2025, 4, 16), "Fed chair warns tariffs could lift inflation and slow growth", "The central bank will wait for greater clarity before moving rates.", "Central Bank Wire"),
]

_POSITIVE_HEADLINES = (
    "{name} shares rally as analysts raise price targets",
    "{name} beats quarterly expectations on strong demand",
    "{name} announces record share buyback program",
    "{name} gains after upgrade from a major broker",
)
_NEGATIVE_HEADLINES = (
    "{name} shares fall amid tariff worries",
    "{name} slumps after analyst downgrade",
    "{name} warns of weaker outlook for the quarter",
    "{name} drops as costs pressure margins",
)
_NEUTRAL_HEADLINES = (
    "{name} to host annual investor day next month",
    "{name} names new independent board member",
    "{name} files routine quarterly disclosure",
)
_INSIDERS = (
    ("A. Rivera", "Chief Executive Officer"),
    ("M. Chen", "Chief Financial Officer"),
    ("K. Osei", "Director"),
    ("L. Novak", "General Counsel"),
)


def _cents(x, rounding=None) -> Decimal:
    d = Decimal(repr(float(x)))
    return d.quantize(CENT, rounding=rounding) if rounding else d.quantize(CENT)


def market_returns(days: list[date], rng: np.random.Generator) -> np.ndarray:
    out = np.empty(len(days))
    for i, d in enumerate(days):
        if d in MARKET_SHOCKS:
            out[i] = MARKET_SHOCKS[d]
        elif d >= date(2025, 2, 20):
            out[i] = rng.normal(-0.0025, 0.009)
        else:
            out[i] = rng.normal(0.0004, 0.008)
    return out


def close_path(days: list[date], returns: np.ndarray, start: float, pins: dict) -> list[Decimal]:
    """Closes from daily returns, honoring pinned closes exactly.

    Days before the first pin are back-filled from it, days after a pin
    compound forward from it.
    """
    n = len(days)
    closes: list[float | None] = [None] * n
    pinned = [i for i, d in enumerate(days) if d in pins]
    if pinned:
        first = pinned[0]
        closes[first] = float(pins[days[first]])
        for i in range(first - 1, -1, -1):
            closes[i] = closes[i + 1] / (1 + returns[i + 1])
        begin = first + 1
    else:
        closes[0] = start
        begin = 1
    for i in range(begin, n):
        closes[i] = float(pins[days[i]]) if days[i] in pins else closes[i - 1] * (1 + returns[i])
    return [Decimal(str(pins[d])) if d in pins else _cents(c) for d, c in zip(days, closes)]


def ohlcv_records(days, closes, model: TickerModel, returns, rng) -> list[dict]:
    out = []
    prev = closes[0]
    for i, (d, close) in enumerate(zip(days, closes)):
        open_ = _cents(float(prev) * (1 + rng.normal(0, 0.004))) if i else _cents(float(close) * (1 + rng.normal(0, 0.004)))
        hi_pad, lo_pad = abs(rng.normal(0, 0.006)), abs(rng.normal(0, 0.006))
        high = _cents(float(max(open_, close)) * (1 + hi_pad), ROUND_CEILING)
        low = _cents(float(min(open_, close)) * (1 - lo_pad), ROUND_FLOOR)
        volume = int(model.base_volume * np.exp(rng.normal(0, 0.25)) * (1 + 8 * abs(returns[i])))
        out.append({"date": d.isoformat(), "open": str(open_), "high": str(high), "low": str(low),
                    "close": str(close), "volume": volume})
        prev = close
    return out


def news_records(ticker, model, days, returns, rng) -> list[dict]:
    out = []
    for d, r in zip(days, returns):
        if abs(r) < 0.015 and rng.random() > 0.3:
            continue
        if r >= 0.015:
            bank, summary = _POSITIVE_HEADLINES, "Investors reacted to upbeat news."
        elif r <= -0.015:
            bank, summary = _NEGATIVE_HEADLINES, "Investors reacted to disappointing news."
        else:
            bank, summary = _NEUTRAL_HEADLINES, "The announcement had little immediate effect."
        headline = bank[int(rng.integers(len(bank)))].format(name=model.name)
        out.append({"date": d.isoformat(), "headline": headline, "summary": summary,
                    "source": "Market Newswire", "scope": "Company", "ticker": ticker})
    return out


def insider_records(ticker, days, closes, rng) -> list[dict]:
    out = []
    for d, close in zip(days, closes):
        if rng.random() > 0.12:
            continue
        name, role = _INSIDERS[int(rng.integers(len(_INSIDERS)))]
        kind = "InsiderBuy" if rng.random() < 0.35 else "InsiderSell"
        shares = int(rng.integers(1, 40)) * 500
        out.append({"date": d.isoformat(), "ticker": ticker, "insider_name": name, "role": role,
                    "kind": kind, "shares": shares, "price": str(close)})
    return out


def fundamentals_records(ticker, model: TickerModel, rng) -> list[dict]:
    out = []
    for q, period_end in enumerate((date(2024, 6, 30), date(2024, 9, 30), date(2024, 12, 31))):
        growth = 1 + 0.02 * q + rng.normal(0, 0.01)
        revenue = Decimal(int(model.revenue_bn * growth * 1e9))
        gross = round(model.gross_margin + rng.normal(0, 0.005), 4)
        net = round(model.net_margin + rng.normal(0, 0.005), 4)
        out.append({
            "ticker": ticker,
            "period_end": period_end.isoformat(),
            "available_on": (period_end + timedelta(days=35)).isoformat(),
            "revenue": str(revenue),
            "net_income": str(int(revenue * Decimal(repr(net)))),
            "gross_margin": gross,
            "net_margin": net,
            "pe_ratio": round(float(rng.uniform(10, 32)), 2),
            "pb_ratio": round(float(rng.uniform(1.2, 12)), 2),
        })
    return out


def macro_records() -> list[dict]:
    rows = []
    months = [date(2024, m, 1) for m in range(7, 13)] + [date(2025, m, 1) for m in (1, 2, 3)]
    cpi = [314.5, 314.8, 315.3, 315.6, 316.4, 317.6, 319.1, 319.8, 319.6]
    unemp = [4.2, 4.2, 4.1, 4.1, 4.2, 4.1, 4.0, 4.1, 4.2]
    for m, c, u in zip(months, cpi, unemp):
        release = (m + timedelta(days=45)).replace(day=12)
        rows.append({"name": "CPI", "date": m.isoformat(), "value": c, "unit": "index", "available_on": release.isoformat()})
        rows.append({"name": "UNEMPLOYMENT", "date": m.isoformat(), "value": u, "unit": "percent",
                     "available_on": (release - timedelta(days=7)).isoformat()})
        rows.append({"name": "FEDERAL_FUNDS_RATE", "date": m.isoformat(),
                     "value": 5.33 if m < date(2024, 9, 1) else (4.83 if m < date(2024, 11, 1) else 4.33),
                     "unit": "percent", "available_on": (release - timedelta(days=10)).isoformat()})
    for q, v in ((date(2024, 4, 1), 3.0), (date(2024, 7, 1), 3.1), (date(2024, 10, 1), 2.4)):
        rows.append({"name": "REAL_GDP", "date": q.isoformat(), "value": v, "unit": "percent annualized",
                     "available_on": (q + timedelta(days=120)).isoformat()})
    rows.sort(key=lambda r: (r["date"], r["name"]))
    return rows


def _write_jsonl(path: Path, rows: list[dict]) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8") as fh:
        for r in rows:
            fh.write(json.dumps(r, sort_keys=True, separators=(",", ":")) + "\n")


def generate(
    root: str | Path,
    start: date = date(2024, 10, 1),
    end: date = date(2025, 4, 17),
    tickers: dict[str, TickerModel] = DEFAULT_TICKERS,
    seed: int = 20250417,
) -> Path:
    """Write a full fixture directory under ``root`` and return it."""
    root = Path(root)
    rng = np.random.default_rng(seed)
    days = trading_calendar(start, end)
    mkt = market_returns(days, rng)
    manifest = {"tickers": {}}
    models = dict(tickers)
    models[BENCHMARK] = BENCHMARK_MODEL
    for ticker, model in models.items():
        idio = rng.normal(0, model.idio_vol, len(days)) if model.idio_vol else np.zeros(len(days))
        rets = model.beta * mkt + idio
        closes = close_path(days, rets, model.start_price, model.pins)
        realized = np.array([0.0] + [float(b / a - 1) for a, b in zip(closes, closes[1:])])
        _write_jsonl(root / ticker / "ohlcv.jsonl", ohlcv_records(days, closes, model, realized, rng))
        manifest["tickers"][ticker] = {"start": days[0].isoformat(), "end": days[-1].isoformat()}
        if ticker == BENCHMARK:
            continue
        _write_jsonl(root / ticker / "news.jsonl", news_records(ticker, model, days, realized, rng))
        _write_jsonl(root / ticker / "insider.jsonl", insider_records(ticker, days, closes, rng))
        _write_jsonl(root / ticker / "fundamentals.jsonl", fundamentals_records(ticker, model, rng))
    _write_jsonl(root / POLICY_DIR / "news.jsonl", [
        {"date": d.isoformat(), "headline": h, "summary": s, "source": src, "scope": "Policy"}
        for d, h, s, src in POLICY_NEWS
    ])
    _write_jsonl(root / MACRO_DIR / "indicators.jsonl", macro_records())
    (root / MANIFEST).write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return root


if __name__ == "__main__":
    out = generate(sys.argv[1] if len(sys.argv) > 1 else Path(__file__).parent / "data" / "fixtures")
    print(f"wrote fixtures to {out}")
