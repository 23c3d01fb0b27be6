"""Planner -> analyst team -> portfolio manager, one trading day at a time."""

from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from datetime import date
from decimal import ROUND_FLOOR, ROUND_HALF_EVEN, Decimal
from enum import Enum
from typing import Callable, Mapping, Sequence

from livefund.domain import (
    CASH_QUANTUM,
    DEFAULT_MEMORY_SIZE,
    PRICE_QUANTUM,
    AnalystKind,
    Decision,
    DecisionAction,
    FundState,
    Portfolio,
    Position,
    Signal,
    SignalDirection,
    TradeRecord,
    push_decision_memory,
    to_decimal,
    validate_ticker,
)
from livefund.errors import (
    CorruptLedger,
    InfeasibleExecution,
    LlmUnavailable,
    MalformedResponse,
    ProviderUnavailable,
)
from livefund.indicators import IndicatorParams, summarize
from livefund.ledger import EntryKind, Ledger, LedgerEntry, PortfolioSnapshot, portfolio_value
from livefund.llm.client import LlmFactory, ModelProfile, RequestTag
from livefund.llm.parsing import parse_decision_response, parse_planner_response, parse_signal_response
from livefund.llm.prompts import render_analyst_prompt, render_manager_prompt, render_planner_prompt
from livefund.llm.stub import ROLE_MANAGER, ROLE_PLANNER
from livefund.market.gateway import (
    DEFAULT_INSIDER_COUNT,
    DEFAULT_MACRO_COUNT,
    DEFAULT_NEWS_COUNT,
    DEFAULT_OHLCV_WINDOW,
    MarketGateway,
)
from livefund.market.models import ClockMode, SimulationClock

log = logging.getLogger(__name__)

DEFAULT_ANALYSTS = (
    AnalystKind.TECHNICAL,
    AnalystKind.COMPANY_NEWS,
    AnalystKind.POLICY,
    AnalystKind.INSIDER,
)


class PlannerMode(str, Enum):
    DETERMINISTIC = "deterministic"
    DYNAMIC = "dynamic"


@dataclass(frozen=True)
class RiskParams:
    tilt_factor: Decimal = Decimal("0.5")
    max_weight: Decimal = Decimal("0.30")
    base_weight_mode: str = "equal"

    def __post_init__(self):
        object.__setattr__(self, "tilt_factor", to_decimal(self.tilt_factor))
        object.__setattr__(self, "max_weight", to_decimal(self.max_weight))
        if not 0 <= self.tilt_factor <= 1:
            raise ValueError("tilt_factor must lie in [0, 1]")
        if not 0 <= self.max_weight <= 1:
            raise ValueError("max_weight must lie in [0, 1]")
        if self.base_weight_mode != "equal":
            raise ValueError("only equal base weights are supported")


@dataclass(frozen=True)
class DataParams:
    technical_window: int = DEFAULT_OHLCV_WINDOW
    news_count: int = DEFAULT_NEWS_COUNT
    insider_count: int = DEFAULT_INSIDER_COUNT
    macro_count: int = DEFAULT_MACRO_COUNT
    indicators: IndicatorParams = IndicatorParams()


@dataclass(frozen=True)
class RunConfig:
    run_id: str
    universe: tuple[str, ...]
    start_date: date
    end_date: date
    model_profile: ModelProfile
    initial_cash: Decimal = Decimal(100000)
    planner_mode: PlannerMode = PlannerMode.DETERMINISTIC
    analyst_set: tuple[AnalystKind, ...] = DEFAULT_ANALYSTS
    decision_memory_size: int = DEFAULT_MEMORY_SIZE
    risk_params: RiskParams = RiskParams()
    data_params: DataParams = DataParams()
    max_workers: int = 4

    def __post_init__(self):
        object.__setattr__(self, "universe", tuple(self.universe))
        object.__setattr__(self, "analyst_set", tuple(AnalystKind(a) for a in self.analyst_set))
        object.__setattr__(self, "initial_cash", to_decimal(self.initial_cash))
        object.__setattr__(self, "planner_mode", PlannerMode(self.planner_mode))
        for t in self.universe:
            validate_ticker(t)
        if not self.universe or len(set(self.universe)) != len(self.universe):
            raise ValueError("universe must be non-empty and duplicate-free")
        if self.start_date > self.end_date:
            raise ValueError("start_date is after end_date")
        if self.initial_cash <= 0:
            raise ValueError("initial_cash must be positive")
        if not self.analyst_set:
            raise ValueError("analyst_set must not be empty")
        if self.decision_memory_size < 1:
            raise ValueError("decision_memory_size must be at least 1")
        if self.max_workers < 1:
            raise ValueError("max_workers must be at least 1")


# --- planning ---------------------------------------------------------------


def plan_analysts(
    config: RunConfig, state: FundState, llm: LlmFactory | None = None
) -> list[AnalystKind]:
    if config.planner_mode is PlannerMode.DETERMINISTIC or llm is None:
        return list(config.analyst_set)
    system, user = render_planner_prompt(config.universe, state.portfolio, config.analyst_set)
    try:
        ex = llm.complete(config.model_profile, system, user, RequestTag(ROLE_PLANNER, None, state.trading_date))
        return parse_planner_response(ex.response_text, config.analyst_set)
    except (LlmUnavailable, MalformedResponse) as exc:
        log.warning("planner failed on %s (%s); using configured analysts", state.trading_date, exc)
        return list(config.analyst_set)


# --- analysts ---------------------------------------------------------------


def _analyst_payload(kind: AnalystKind, ticker: str, clock: SimulationClock, gateway: MarketGateway, p: DataParams):
    if kind is AnalystKind.TECHNICAL:
        return summarize(gateway.fetch_ohlcv(ticker, p.technical_window, clock), p.indicators)
    if kind is AnalystKind.COMPANY_NEWS:
        return gateway.fetch_company_news(ticker, p.news_count, clock)
    if kind is AnalystKind.POLICY:
        return gateway.fetch_policy_news(p.news_count, clock)
    if kind is AnalystKind.INSIDER:
        return gateway.fetch_insider(ticker, p.insider_count, clock)
    if kind is AnalystKind.FUNDAMENTAL:
        return gateway.fetch_fundamentals(ticker, clock)
    if kind is AnalystKind.MACRO_ECONOMIC:
        return gateway.fetch_macro(p.macro_count, clock)
    raise ValueError(f"unsupported analyst {kind}")


def run_analyst(
    kind: AnalystKind,
    ticker: str,
    clock: SimulationClock,
    gateway: MarketGateway,
    llm: LlmFactory,
    profile: ModelProfile,
    params: DataParams = DataParams(),
) -> Signal:
    """One analyst's signal for ``ticker`` on the clock date.

    LLM and parse failures yield the invalid-signal sentinel; a leakage
    violation propagates.
    """
    day = clock.current_date
    try:
        payload = _analyst_payload(kind, ticker, clock, gateway, params)
    except ProviderUnavailable as exc:
        log.warning("%s data for %s unavailable on %s: %s", kind.value, ticker, day, exc)
        return Signal.fallback(kind, ticker, day)
    system, user = render_analyst_prompt(kind, ticker, day, payload)
    try:
        ex = llm.complete(profile, system, user, RequestTag(kind.value, ticker, day))
        direction, why = parse_signal_response(ex.response_text)
    except (LlmUnavailable, MalformedResponse) as exc:
        log.info("%s analyst for %s on %s fell back: %s", kind.value, ticker, day, exc)
        return Signal.fallback(kind, ticker, day)
    return Signal(kind, ticker, day, direction, why)


# --- risk control -----------------------------------------------------------


def compute_tradable_shares(
    portfolio: Portfolio,
    ticker: str,
    price: Decimal,
    signals: Sequence[Signal],
    risk: RiskParams,
    universe_size: int,
    prices: Mapping[str, Decimal] | None = None,
) -> int:
    """Signed share count moving the position toward its target weight.

    The target is an equal weight tilted by net valid signal sentiment and
    clamped to ``[0, max_weight]``. Other holdings are marked at ``prices``
    (their cost basis when no price is given).
    """
    price = to_decimal(price)
    if price <= 0:
        raise ValueError("price must be positive")
    if universe_size < 1:
        raise ValueError("universe_size must be positive")
    prices = prices or {}
    total = portfolio.cash
    for sym, pos in portfolio.positions.items():
        mark = price if sym == ticker else prices.get(sym, pos.cost_basis)
        total += pos.shares * mark
    valid = [s for s in signals if s.valid]
    net = sum(1 for s in valid if s.direction is SignalDirection.BULLISH) - sum(
        1 for s in valid if s.direction is SignalDirection.BEARISH
    )
    tilt = risk.tilt_factor * Decimal(net) / max(1, len(valid))
    target_weight = Decimal(1) / universe_size * (1 + tilt)
    target_weight = min(max(target_weight, Decimal(0)), risk.max_weight)
    target_value = (target_weight * total).quantize(CASH_QUANTUM, rounding=ROUND_HALF_EVEN)
    current_value = portfolio.shares(ticker) * price
    return int(((target_value - current_value) / price).to_integral_value(rounding=ROUND_FLOOR))


# --- manager ----------------------------------------------------------------


def _decide(
    ticker: str,
    state: FundState,
    price: Decimal,
    tradable: int,
    llm: LlmFactory,
    profile: ModelProfile,
    signals: Sequence[Signal] = (),
) -> tuple[Decision, int]:
    day = state.trading_date
    held = state.portfolio.shares(ticker)
    system, user = render_manager_prompt(ticker, state.memory_for(ticker), price, held, tradable, signals)
    try:
        ex = llm.complete(profile, system, user, RequestTag(ROLE_MANAGER, ticker, day))
        parsed = parse_decision_response(ex.response_text)
    except (LlmUnavailable, MalformedResponse) as exc:
        log.info("manager for %s on %s fell back: %s", ticker, day, exc)
        return Decision.fallback(ticker, day, price), 0
    if parsed.price is not None and parsed.price != price:
        log.debug("%s %s: model quoted %s, executing at %s", ticker, day, parsed.price, price)
    requested = parsed.shares
    shares = requested
    if parsed.action is DecisionAction.BUY:
        affordable = int((state.portfolio.cash / price).to_integral_value(rounding=ROUND_FLOOR))
        shares = min(requested, max(0, tradable), affordable)
    elif parsed.action is DecisionAction.SELL:
        shares = min(requested, held)
    if shares != requested:
        log.info("%s %s: %s %d clamped to %d", ticker, day, parsed.action.value, requested, shares)
    action = parsed.action if shares > 0 else DecisionAction.HOLD
    return Decision(ticker, day, action, shares, price, parsed.justification), requested


def decide(
    ticker: str,
    state: FundState,
    price: Decimal,
    tradable: int,
    llm: LlmFactory,
    profile: ModelProfile,
    signals: Sequence[Signal] = (),
) -> Decision:
    """Ask the manager, then clamp the reply to what can be executed."""
    return _decide(ticker, state, to_decimal(price), tradable, llm, profile, signals)[0]


def execute_decision(
    portfolio: Portfolio, decision: Decision, run_id: str = "", requested_shares: int | None = None
) -> tuple[Portfolio, TradeRecord]:
    t, n, px = decision.ticker, decision.shares, decision.price
    pos = portfolio.positions.get(t, Position(t))
    cash = portfolio.cash
    if decision.action is DecisionAction.BUY:
        cost = n * px
        if cost > cash:
            raise InfeasibleExecution(f"buy {n} {t} @ {px} costs {cost}, cash {cash}")
        new_shares = pos.shares + n
        basis = ((pos.shares * pos.cost_basis + cost) / new_shares).quantize(PRICE_QUANTUM)
        cash = cash - cost
        pos = Position(t, new_shares, basis)
    elif decision.action is DecisionAction.SELL:
        if n > pos.shares:
            raise InfeasibleExecution(f"sell {n} {t} but only {pos.shares} held")
        cash = cash + n * px
        left = pos.shares - n
        pos = Position(t, left, pos.cost_basis if left else Decimal(0))
    new = portfolio.with_position(pos, cash) if decision.action is not DecisionAction.HOLD else portfolio
    new = replace(new, as_of=decision.date)
    record = TradeRecord(
        run_id=run_id,
        date=decision.date,
        ticker=t,
        action=decision.action,
        requested_shares=n if requested_shares is None else max(requested_shares, n),
        executed_shares=n,
        price=px,
        cash_after=new.cash,
        shares_after=new.shares(t),
        justification=decision.justification,
    )
    return new, record


# --- day and period ---------------------------------------------------------


def step_day(
    config: RunConfig,
    state: FundState,
    clock: SimulationClock,
    gateway: MarketGateway,
    llm: LlmFactory,
    ledger: Ledger | None = None,
    prompt_hook: Callable[[str, str, str], None] | None = None,
) -> FundState:
    """Run one trading day and append its records to the ledger as one batch."""
    day = clock.current_date
    state = FundState(state.run_id, day, state.portfolio, {}, state.decision_memory, state.memory_capacity)
    profile = config.model_profile
    analysts = plan_analysts(config, state, llm)
    prices = {t: gateway.fetch_price(t, clock) for t in config.universe}

    jobs = [(t, k) for t in config.universe for k in analysts]
    workers = min(config.max_workers, len(jobs)) or 1
    with ThreadPoolExecutor(max_workers=workers) as pool:
        futures = {
            job: pool.submit(run_analyst, job[1], job[0], clock, gateway, llm, profile, config.data_params)
            for job in jobs
        }
        results = {job: f.result() for job, f in futures.items()}

    signals_today = {t: tuple(results[(t, k)] for k in analysts) for t in config.universe}
    records: list = sorted(
        (s for sigs in signals_today.values() for s in sigs), key=lambda s: (s.ticker, s.analyst.value)
    )

    portfolio = state.portfolio
    memory = dict(state.decision_memory)
    for ticker in config.universe:
        price = prices[ticker]
        sigs = signals_today[ticker]
        tradable = compute_tradable_shares(
            portfolio, ticker, price, sigs, config.risk_params, len(config.universe), prices
        )
        view = FundState(state.run_id, day, portfolio, signals_today, memory, state.memory_capacity)
        if prompt_hook:
            prompt_hook(ticker, *render_manager_prompt(ticker, view.memory_for(ticker), price,
                                                       portfolio.shares(ticker), tradable, sigs))
        decision, requested = _decide(ticker, view, price, tradable, llm, profile, sigs)
        portfolio, trade = execute_decision(portfolio, decision, state.run_id, requested)
        memory[ticker] = push_decision_memory(memory.get(ticker, ()), decision, state.memory_capacity)
        records += [decision, trade]

    portfolio = replace(portfolio, as_of=day)
    portfolio.check_universe(config.universe)
    records.append(PortfolioSnapshot(portfolio, portfolio_value(portfolio, prices), prices))
    if ledger is not None:
        ledger.append_many(state.run_id, records, day)
    return FundState(state.run_id, day, portfolio, signals_today, memory, state.memory_capacity)


@dataclass
class RunSummary:
    run_id: str
    days: int
    signals: int
    valid_signals: int
    decisions: int
    valid_decisions: int
    final_portfolio: Portfolio
    final_value: Decimal
    trading_days: list[date] = field(default_factory=list)

    @property
    def signal_validity(self) -> float:
        return self.valid_signals / self.signals if self.signals else 1.0

    @property
    def decision_validity(self) -> float:
        return self.valid_decisions / self.decisions if self.decisions else 1.0

    def lines(self) -> list[str]:
        return [
            f"run: {self.run_id}",
            f"days: {self.days}",
            f"signals: {self.signals} ({self.signal_validity:.2%} valid)",
            f"decisions: {self.decisions} ({self.decision_validity:.2%} valid)",
            f"final value: {self.final_value}",
            f"final cash: {self.final_portfolio.cash}",
        ]


def _resume_state(config: RunConfig, entries: list[LedgerEntry]) -> tuple[FundState, date | None]:
    memory: dict[str, tuple[Decision, ...]] = {}
    state = FundState(
        config.run_id, config.start_date, Portfolio(config.initial_cash), {}, {}, config.decision_memory_size
    )
    last_day = None
    pending = False
    for e in entries:
        if e.kind is EntryKind.DECISION:
            memory[e.record.ticker] = push_decision_memory(memory.get(e.record.ticker, ()), e.record,
                                                           config.decision_memory_size)
            pending = True
        elif e.kind is EntryKind.SNAPSHOT:
            state = FundState(config.run_id, e.date, e.record.portfolio, {}, dict(memory),
                              config.decision_memory_size)
            last_day = e.date
            pending = False
        else:
            pending = True
    if pending:
        raise CorruptLedger(f"run {config.run_id} ends part-way through a trading day; cannot resume")
    return state, last_day


def summarize_entries(run_id: str, entries: Sequence[LedgerEntry], config_cash: Decimal) -> RunSummary:
    sigs = [e.record for e in entries if e.kind is EntryKind.SIGNAL]
    decs = [e.record for e in entries if e.kind is EntryKind.DECISION]
    snaps = [e for e in entries if e.kind is EntryKind.SNAPSHOT]
    final = snaps[-1].record if snaps else None
    return RunSummary(
        run_id=run_id,
        days=len({e.date for e in snaps}),
        signals=len(sigs),
        valid_signals=sum(s.valid for s in sigs),
        decisions=len(decs),
        valid_decisions=sum(d.valid for d in decs),
        final_portfolio=final.portfolio if final else Portfolio(config_cash),
        final_value=final.total_value if final else config_cash,
        trading_days=sorted({e.date for e in snaps}),
    )


def run_period(
    config: RunConfig,
    gateway: MarketGateway,
    llm: LlmFactory,
    ledger: Ledger,
    mode: ClockMode = ClockMode.REPLAY,
    today: Callable[[], date] = date.today,
    meta: Mapping | None = None,
) -> RunSummary:
    """Run every trading day in the configured window, resuming a partial ledger."""
    ledger.register_run(config.run_id, meta or run_meta(config))
    state, last_day = _resume_state(config, ledger.load_run(config.run_id))
    mode = ClockMode(mode)
    if mode is ClockMode.LIVE:
        now = today()
        days = [now] if config.start_date <= now <= config.end_date and now.weekday() < 5 else []
    else:
        days = gateway.trading_days(config.start_date, config.end_date, config.universe)
    days = [d for d in days if last_day is None or d > last_day]
    if not days:
        log.warning("run %s: no trading days left in %s..%s", config.run_id, config.start_date, config.end_date)
    clock = None
    for d in days:
        if clock is None:
            clock = SimulationClock(d, mode, today=today)
        else:
            clock.advance_to(d)
        state = step_day(config, state, clock, gateway, llm, ledger)
        log.info("run %s: finished %s, cash %s", config.run_id, d, state.portfolio.cash)
    return summarize_entries(config.run_id, ledger.load_run(config.run_id), config.initial_cash)


def run_meta(config: RunConfig) -> dict:
    return {
        "model": config.model_profile.model_id,
        "provider": config.model_profile.provider_id,
        "universe": list(config.universe),
        "initial_cash": str(config.initial_cash),
        "start_date": config.start_date.isoformat(),
        "end_date": config.end_date.isoformat(),
        "analysts": [a.value for a in config.analyst_set],
        "planner_mode": config.planner_mode.value,
    }
