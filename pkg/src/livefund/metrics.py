"""Performance metrics and behavioral analytics over ledger data.

Portfolio values stay :class:`~decimal.Decimal` until a metric needs
statistics; cumulative returns are computed in decimal so round figures
such as 100000 -> 101100 give exactly 1.1 percent.
"""

from __future__ import annotations

import logging
import math
from collections import Counter
from dataclasses import dataclass, field
from datetime import date
from decimal import Decimal
from typing import Iterable, Mapping, Sequence

import numpy as np

from livefund.domain import (
    AnalystKind,
    Decision,
    DecisionAction,
    Portfolio,
    Signal,
    SignalDirection,
    TradeRecord,
    to_decimal,
)
from livefund.errors import (
    InsufficientData,
    MisalignedSeries,
    MissingNextPrice,
    MissingPrice,
    ZeroMarketVariance,
    ZeroVariance,
)
from livefund.ledger import EntryKind, LedgerEntry, portfolio_value, value_series

log = logging.getLogger(__name__)

INVALID = "Invalid"


@dataclass(frozen=True)
class ReturnSeries:
    dates: tuple[date, ...]
    values: tuple[Decimal, ...]

    def __post_init__(self):
        object.__setattr__(self, "dates", tuple(self.dates))
        object.__setattr__(self, "values", tuple(to_decimal(v) for v in self.values))
        if not self.values:
            raise InsufficientData("a return series needs at least one point")
        if len(self.dates) != len(self.values):
            raise ValueError("dates and values differ in length")
        if any(b <= a for a, b in zip(self.dates, self.dates[1:])):
            raise ValueError("dates must be strictly increasing")
        if any(v <= 0 for v in self.values):
            raise ValueError("portfolio values must be positive")

    @classmethod
    def from_values(cls, values: Sequence, start: date = date(2000, 1, 3)) -> "ReturnSeries":
        """Series on consecutive ordinal days; handy when dates do not matter."""
        return cls(tuple(date.fromordinal(start.toordinal() + i) for i in range(len(values))), tuple(values))

    @classmethod
    def from_pairs(cls, pairs: Iterable[tuple[date, Decimal]]) -> "ReturnSeries":
        pairs = list(pairs)
        return cls(tuple(d for d, _ in pairs), tuple(v for _, v in pairs))

    def __len__(self) -> int:
        return len(self.values)

    def returns(self) -> np.ndarray:
        v = np.array([float(x) for x in self.values])
        return v[1:] / v[:-1] - 1.0

    def restrict(self, dates: Sequence[date]) -> "ReturnSeries":
        index = dict(zip(self.dates, self.values))
        return ReturnSeries(tuple(dates), tuple(index[d] for d in dates))


@dataclass(frozen=True)
class MetricParams:
    risk_free_annual: float = 0.0429
    periods_per_year: int = 252
    market_series: ReturnSeries | None = None

    def __post_init__(self):
        if self.periods_per_year < 1:
            raise ValueError("periods_per_year must be at least 1")

    @property
    def rf_daily(self) -> float:
        return self.risk_free_annual / self.periods_per_year


# --- return metrics ---------------------------------------------------------


def _cr_decimal(first: Decimal, last: Decimal) -> float:
    return float((last / first - 1) * 100)


def cumulative_return(series: ReturnSeries) -> float:
    return _cr_decimal(series.values[0], series.values[-1])


def buy_and_hold_return(
    day1_portfolio: Portfolio, prices_by_date: Mapping[date, Mapping[str, Decimal]]
) -> float:
    """CR of the day-1 portfolio frozen and revalued on the last priced date.

    ``day1_portfolio`` is the state after day-1 trades; the first date in
    ``prices_by_date`` marks its starting value.
    """
    if not prices_by_date:
        raise MissingPrice("no prices to revalue the buy-and-hold portfolio")
    days = sorted(prices_by_date)
    start = portfolio_value(day1_portfolio, prices_by_date[days[0]])
    end = portfolio_value(day1_portfolio, prices_by_date[days[-1]])
    return _cr_decimal(start, end)


def sharpe_ratio(series: ReturnSeries, params: MetricParams = MetricParams()) -> float:
    if len(series) < 3:
        raise InsufficientData("the Sharpe ratio needs at least 3 points")
    excess = series.returns() - params.rf_daily
    if np.ptp(excess) == 0:
        raise ZeroVariance("excess returns are constant")
    sd = excess.std(ddof=1)
    if sd == 0:
        raise ZeroVariance("excess returns are constant")
    return float(excess.mean() / sd * math.sqrt(params.periods_per_year))


def max_drawdown(series: ReturnSeries) -> float:
    v = np.array([float(x) for x in series.values])
    peak = np.maximum.accumulate(v)
    return float(((peak - v) / peak).max() * 100)


def _aligned(series: ReturnSeries, market: ReturnSeries) -> tuple[ReturnSeries, ReturnSeries]:
    missing = [d for d in series.dates if d not in set(market.dates)]
    if missing:
        raise MisalignedSeries(f"benchmark lacks {len(missing)} portfolio dates, first {missing[0]}")
    market = market.restrict(series.dates)
    if len(series) < 3:
        raise MisalignedSeries("beta needs at least 2 common returns")
    return series, market


def beta(series: ReturnSeries, market: ReturnSeries) -> float:
    series, market = _aligned(series, market)
    rs, rm = series.returns(), market.returns()
    if np.ptp(rm) == 0:
        raise ZeroMarketVariance("benchmark returns are constant")
    var = rm.var(ddof=1)
    if var == 0:
        raise ZeroMarketVariance("benchmark returns are constant")
    return float(np.cov(rs, rm, ddof=1)[0, 1] / var)


def alpha(series: ReturnSeries, market: ReturnSeries, params: MetricParams = MetricParams()) -> float:
    """Window alpha: cumulative portfolio return over the CAPM expectation."""
    b = beta(series, market)
    series, market = _aligned(series, market)
    r_s = float(series.values[-1] / series.values[0] - 1)
    r_m = float(market.values[-1] / market.values[0] - 1)
    r_f = params.risk_free_annual * (len(series) - 1) / params.periods_per_year
    return r_s - (r_f + b * (r_m - r_f))


def win_rate(
    trades: Sequence[TradeRecord], next_day_prices: Mapping[tuple[str, date], Decimal], final_day: date | None = None
) -> float | None:
    """Share of executed Buy/Sell trades whose next-day close favors them.

    ``next_day_prices`` maps ``(ticker, trade_date)`` to the following
    trading day's close. Trades on ``final_day`` and Holds are skipped;
    ``None`` means there was nothing to score.
    """
    wins = n = 0
    for t in trades:
        if t.action is DecisionAction.HOLD or t.executed_shares == 0 or t.date == final_day:
            continue
        key = (t.ticker, t.date)
        if key not in next_day_prices:
            raise MissingNextPrice(f"no next-day price for {t.ticker} after {t.date}")
        nxt = next_day_prices[key]
        r = nxt - t.price if t.action is DecisionAction.BUY else t.price - nxt
        n += 1
        wins += r > 0
    return wins / n * 100 if n else None


# --- behavioral analytics ---------------------------------------------------


@dataclass(frozen=True)
class Verdict:
    consistent: bool
    reason: str


def dominant_direction(signals: Sequence[Signal]) -> SignalDirection | None:
    counts = Counter(s.direction for s in signals if s.valid and s.direction is not SignalDirection.NEUTRAL)
    directional = sum(counts.values())
    for d in (SignalDirection.BULLISH, SignalDirection.BEARISH):
        if directional >= 1 and counts[d] * 2 > directional:
            return d
    return None


def classify_consistency(signals_of_day: Sequence[Signal], decision: Decision) -> Verdict:
    valid = [s for s in signals_of_day if s.valid]
    dom = dominant_direction(valid)
    a = decision.action
    if not valid:
        return Verdict(a is DecisionAction.HOLD, "no valid signals")
    if a is DecisionAction.HOLD:
        return Verdict(dom is None, "no dominant direction" if dom is None else f"dominant {dom.value}")
    wanted = SignalDirection.BULLISH if a is DecisionAction.BUY else SignalDirection.BEARISH
    label = "none" if dom is None else dom.value
    return Verdict(dom is wanted, f"{a.value} against dominant {label}" if dom is not wanted else f"dominant {label}")


def classify_effectiveness(decision: Decision, next_price: Decimal | None) -> bool | None:
    """True/False for an executed Buy or Sell; ``None`` when not applicable.

    A final-day decision is passed with ``next_price=None``.
    """
    if decision.action is DecisionAction.HOLD or decision.shares == 0:
        return None
    if next_price is None:
        return None
    next_price = to_decimal(next_price)
    if decision.action is DecisionAction.BUY:
        return next_price > decision.price
    return next_price < decision.price


@dataclass
class Distributions:
    signals: dict[str, dict[str, int]] = field(default_factory=dict)
    actions: dict[str, dict[str, int]] = field(default_factory=dict)

    def signal_total(self) -> int:
        return sum(sum(h.values()) for h in self.signals.values())

    def action_total(self) -> int:
        return sum(sum(h.values()) for h in self.actions.values())

    def to_dict(self) -> dict:
        return {"signals": self.signals, "actions": self.actions}


def distributions(entries: Iterable[LedgerEntry]) -> Distributions:
    """Direction counts per analyst and action counts per ticker.

    Fallback records go in an ``Invalid`` bucket so totals match the record
    counts used as validity denominators.
    """
    sig_keys = [d.value for d in SignalDirection] + [INVALID]
    act_keys = [a.value for a in DecisionAction] + [INVALID]
    out = Distributions({k.value: dict.fromkeys(sig_keys, 0) for k in AnalystKind}, {})
    for e in entries:
        r = e.record
        if e.kind is EntryKind.SIGNAL:
            out.signals[r.analyst.value][r.direction.value if r.valid else INVALID] += 1
        elif e.kind is EntryKind.DECISION:
            hist = out.actions.setdefault(r.ticker, dict.fromkeys(act_keys, 0))
            hist[r.action.value if r.valid else INVALID] += 1
    out.actions = dict(sorted(out.actions.items()))
    return out


@dataclass(frozen=True)
class ValidityCounts:
    signals: int
    valid_signals: int
    decisions: int
    valid_decisions: int

    @property
    def signal_rate(self) -> float:
        return self.valid_signals / self.signals if self.signals else 1.0

    @property
    def decision_rate(self) -> float:
        return self.valid_decisions / self.decisions if self.decisions else 1.0


def validity_rates(entries: Iterable[LedgerEntry]) -> tuple[float, float, ValidityCounts]:
    s = vs = d = vd = 0
    for e in entries:
        if e.kind is EntryKind.SIGNAL:
            s += 1
            vs += e.record.valid
        elif e.kind is EntryKind.DECISION:
            d += 1
            vd += e.record.valid
    counts = ValidityCounts(s, vs, d, vd)
    return counts.signal_rate, counts.decision_rate, counts


# --- report -----------------------------------------------------------------


@dataclass(frozen=True)
class MetricReport:
    model: str
    cr: float
    cr_bnh: float | None
    sr: float | None
    mdd: float
    wr: float | None
    beta: float | None
    alpha: float | None
    validity: ValidityCounts
    consistency_rate: float | None = None
    effectiveness_rate: float | None = None
    distributions: Distributions = field(default_factory=Distributions)
    days: int = 0

    def __post_init__(self):
        if self.mdd < 0:
            raise ValueError("mdd cannot be negative")
        if self.wr is not None and not 0 <= self.wr <= 100:
            raise ValueError("wr must lie in [0, 100]")

    def row(self) -> dict:
        """Leaderboard row; absent metrics are ``None``."""
        return {
            "model": self.model,
            "cr_pct": self.cr,
            "cr_bnh_pct": self.cr_bnh,
            "sr": self.sr,
            "mdd_pct": self.mdd,
            "wr_pct": self.wr,
            "beta": self.beta,
            "alpha": self.alpha,
            "signal_validity": self.validity.signal_rate,
            "decision_validity": self.validity.decision_rate,
        }


def _next_prices(snapshots: list[LedgerEntry]) -> dict[tuple[str, date], Decimal]:
    out = {}
    for cur, nxt in zip(snapshots, snapshots[1:]):
        for ticker, px in nxt.record.prices.items():
            out[(ticker, cur.date)] = px
    return out


def _optional(fn, *args):
    try:
        return fn(*args)
    except (ZeroVariance, InsufficientData, MisalignedSeries) as exc:
        log.warning("%s unavailable: %s", fn.__name__, exc)
        return None


def build_report(
    entries: Sequence[LedgerEntry], model: str, params: MetricParams = MetricParams(), run_id: str = ""
) -> MetricReport:
    """Every metric for one run's ledger entries."""
    entries = list(entries)
    series = ReturnSeries.from_pairs(value_series(entries, run_id))
    snaps: dict[date, LedgerEntry] = {}
    for e in entries:
        if e.kind is EntryKind.SNAPSHOT:
            snaps[e.date] = e
    snapshots = [snaps[d] for d in sorted(snaps)]
    final_day = snapshots[-1].date
    prices_by_date = {e.date: e.record.prices for e in snapshots}
    cr_bnh = buy_and_hold_return(snapshots[0].record.portfolio, prices_by_date)
    # The first snapshot already reflects day-1 trades at day-1 prices, so the
    # baseline's starting value equals the run's day-1 value, not initial cash.

    trades = [e.record for e in entries if e.kind is EntryKind.TRADE]
    next_px = _next_prices(snapshots)
    wr = win_rate(trades, next_px, final_day)

    market = params.market_series
    b = a = None
    if market is not None:
        b = _optional(beta, series, market)
        if b is not None:
            a = alpha(series, market, params)

    signals_by_key: dict[tuple[str, date], list[Signal]] = {}
    decisions: list[Decision] = []
    for e in entries:
        if e.kind is EntryKind.SIGNAL:
            signals_by_key.setdefault((e.record.ticker, e.date), []).append(e.record)
        elif e.kind is EntryKind.DECISION:
            decisions.append(e.record)
    valid_decisions = [d for d in decisions if d.valid]
    consistent = [classify_consistency(signals_by_key.get((d.ticker, d.date), []), d).consistent
                  for d in valid_decisions]
    effective = [
        v for d in valid_decisions
        if (v := classify_effectiveness(d, None if d.date == final_day else next_px.get((d.ticker, d.date))))
        is not None
    ]
    _, _, counts = validity_rates(entries)
    return MetricReport(
        model=model,
        cr=cumulative_return(series),
        cr_bnh=cr_bnh,
        sr=_optional(sharpe_ratio, series, params),
        mdd=max_drawdown(series),
        wr=wr,
        beta=b,
        alpha=a,
        validity=counts,
        consistency_rate=sum(consistent) / len(consistent) if consistent else None,
        effectiveness_rate=sum(effective) / len(effective) if effective else None,
        distributions=distributions(entries),
        days=len(series),
    )
