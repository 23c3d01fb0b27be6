from datetime import date
from decimal import Decimal
from fractions import Fraction
import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import BUNDLED_FIXTURES, FOUR_ANALYSTS, STUB_PROFILE, make_config, make_llm, replay
from livefund.domain import (
    AnalystKind,
    Decision,
    DecisionAction,
    FundState,
    Portfolio,
    Position,
    Signal,
    SignalDirection,
)
from livefund.errors import CorruptLedger, InfeasibleExecution, NoPriceAvailable, UnknownTicker
from livefund.ledger import EntryKind, Ledger
from livefund.market import ClockMode, SimulationClock
from livefund.market.gateway import register_provider
from livefund.workflow import (
    PlannerMode,
    RiskParams,
    compute_tradable_shares,
    decide,
    execute_decision,
    plan_analysts,
    step_day,
)

D = date(2025, 4, 3)
KINDS = list(AnalystKind)


def sig(kind, direction, valid=True):
    if not valid:
        return Signal.fallback(kind, "CVX", D)
    return Signal(kind, "CVX", D, direction, "because")


def tradable_oracle(cash, holdings, ticker, price, directions, tilt, max_w, n):
    """Exact-rational restatement of the sizing rule, rounding only where money is."""
    total = Fraction(cash) + sum(Fraction(s) * Fraction(p) for s, p in holdings.values())
    net = directions.count("up") - directions.count("down")
    w = Fraction(1, n) * (1 + Fraction(tilt) * Fraction(net, max(1, len(directions))))
    w = min(max(w, Fraction(0)), Fraction(max_w))
    exact = w * total
    # half-even rounding to the cent, done on the rational value
    scaled = exact * 100
    floor = math.floor(scaled)
    rest = scaled - floor
    cents = floor + (1 if rest > Fraction(1, 2) or (rest == Fraction(1, 2) and floor % 2) else 0)
    cents = Fraction(cents, 100)
    held = holdings.get(ticker, (0, price))[0]
    return math.floor((cents - held * Fraction(price)) / Fraction(price))


class TestTradableShares:
    def test_empty_portfolio_equal_weight(self):
        p = Portfolio(Decimal(100000))
        assert compute_tradable_shares(p, "AAPL", Decimal(200), [], RiskParams(), 5) == 100

    def test_all_bullish_tilts_up(self):
        p = Portfolio(Decimal(100000))
        sigs = [sig(k, SignalDirection.BULLISH) for k in KINDS[:4]]
        assert compute_tradable_shares(p, "AAPL", Decimal(200), sigs, RiskParams(), 5) == 150

    def test_cap_at_max_weight(self):
        p = Portfolio(Decimal(100000))
        sigs = [sig(k, SignalDirection.BULLISH) for k in KINDS[:4]]
        assert compute_tradable_shares(p, "AAPL", Decimal(200), sigs, RiskParams(Decimal(1), Decimal("0.3")), 2) == 150

    def test_invalid_signals_do_not_count(self):
        p = Portfolio(Decimal(100000))
        sigs = [sig(KINDS[0], SignalDirection.BEARISH), sig(KINDS[1], None, valid=False)]
        # one valid bearish signal: weight 0.2 * 0.5
        assert compute_tradable_shares(p, "AAPL", Decimal(200), sigs, RiskParams(), 5) == 50

    def test_overweight_is_negative(self):
        p = Portfolio(Decimal(0), {"CVX": Position("CVX", 184, Decimal("150"))})
        # the whole fund sits in CVX, the equal-weight target is a fifth of it
        assert compute_tradable_shares(p, "CVX", Decimal("156.12"), [], RiskParams(), 5) == -148

    @given(
        cash=st.decimals(min_value=0, max_value=10**6, places=2),
        held=st.integers(0, 2000),
        price=st.decimals(min_value=Decimal("0.5"), max_value=1000, places=2),
        other=st.integers(0, 500),
        dirs=st.lists(st.sampled_from(["up", "down", "flat"]), max_size=6),
        tilt=st.sampled_from([Decimal(0), Decimal("0.5"), Decimal(1)]),
        max_w=st.sampled_from([Decimal("0.1"), Decimal("0.3"), Decimal(1)]),
        n=st.integers(1, 10),
    )
    @settings(max_examples=300)
    def test_matches_rational_oracle(self, cash, held, price, other, dirs, tilt, max_w, n):
        positions = {"CVX": Position("CVX", held, Decimal(100) if held else 0),
                     "KO": Position("KO", other, Decimal(70) if other else 0)}
        prices = {"CVX": price, "KO": Decimal("71.5")}
        portfolio = Portfolio(cash, positions)
        mapping = {"up": SignalDirection.BULLISH, "down": SignalDirection.BEARISH, "flat": SignalDirection.NEUTRAL}
        sigs = [sig(KINDS[i], mapping[d]) for i, d in enumerate(dirs)]
        got = compute_tradable_shares(portfolio, "CVX", price, sigs, RiskParams(tilt, max_w), n, prices)
        holdings = {"CVX": (held, price), "KO": (other, Decimal("71.5"))}
        assert got == tradable_oracle(cash, holdings, "CVX", price, dirs, tilt, max_w, n)


def manager_llm(reply):
    return make_llm([{"role": "Manager", "response": reply}])


def state_with(portfolio):
    return FundState("r", D, portfolio, {}, {}, 5)


class TestDecide:
    def test_buy_clamped_to_tradable(self):
        d = decide("CVX", state_with(Portfolio(Decimal(100000))), Decimal(100), 7,
                   manager_llm('{"action": "Buy", "shares": 50, "justification": "x"}'), STUB_PROFILE)
        assert (d.action, d.shares) == (DecisionAction.BUY, 7)

    def test_buy_clamped_to_cash(self):
        d = decide("CVX", state_with(Portfolio(Decimal(250))), Decimal(100), 50,
                   manager_llm('{"action": "Buy", "shares": 50, "justification": "x"}'), STUB_PROFILE)
        assert d.shares == 2

    def test_buy_with_negative_tradable_becomes_hold(self):
        d = decide("CVX", state_with(Portfolio(Decimal(1000))), Decimal(100), -3,
                   manager_llm('{"action": "Buy", "shares": 5, "justification": "x"}'), STUB_PROFILE)
        assert (d.action, d.shares, d.valid) == (DecisionAction.HOLD, 0, True)

    def test_sell_clamped_to_holding(self):
        p = Portfolio(Decimal(0), {"CVX": Position("CVX", 4, Decimal(90))})
        d = decide("CVX", state_with(p), Decimal(100), -10,
                   manager_llm('{"action": "Sell", "shares": 10, "justification": "x"}'), STUB_PROFILE)
        assert (d.action, d.shares) == (DecisionAction.SELL, 4)

    def test_model_price_is_ignored(self):
        d = decide("CVX", state_with(Portfolio(Decimal(1000))), Decimal(100), 5,
                   manager_llm('{"action": "Buy", "shares": 1, "price": 1, "justification": "x"}'), STUB_PROFILE)
        assert d.price == Decimal(100)

    def test_malformed_reply_falls_back(self):
        d = decide("CVX", state_with(Portfolio(Decimal(1000))), Decimal(100), 5, manager_llm("sure"), STUB_PROFILE)
        assert not d.valid and d.action is DecisionAction.HOLD


class TestExecute:
    def test_buy_then_sell_conserves_value(self):
        p0 = Portfolio(Decimal("1000.00"))
        p1, t1 = execute_decision(p0, Decision("KO", D, DecisionAction.BUY, 3, Decimal("70.10"), "x"))
        assert p1.cash == Decimal("789.70") and p1.positions["KO"].cost_basis == Decimal("70.10")
        p2, _ = execute_decision(p1, Decision("KO", D, DecisionAction.BUY, 1, Decimal("80.00"), "x"))
        assert p2.positions["KO"].cost_basis == Decimal("72.5750")
        p3, t3 = execute_decision(p2, Decision("KO", D, DecisionAction.SELL, 4, Decimal("75.00"), "x"))
        assert p3.cash == Decimal("1000.00") - Decimal("290.30") + Decimal("300.00")
        assert p3.shares("KO") == 0 and t3.shares_after == 0 and t1.cash_after == p1.cash

    def test_hold_leaves_portfolio(self):
        p = Portfolio(Decimal(5))
        q, t = execute_decision(p, Decision("KO", D, DecisionAction.HOLD, 0, Decimal(1), "x"))
        assert q.cash == p.cash and q.positions == p.positions and t.executed_shares == 0

    def test_infeasible(self):
        with pytest.raises(InfeasibleExecution):
            execute_decision(Portfolio(Decimal(5)), Decision("KO", D, DecisionAction.BUY, 1, Decimal(6), "x"))
        with pytest.raises(InfeasibleExecution):
            execute_decision(Portfolio(Decimal(5)), Decision("KO", D, DecisionAction.SELL, 1, Decimal(6), "x"))


class TestPlanner:
    def test_deterministic_uses_configured_list(self):
        cfg = make_config()
        assert plan_analysts(cfg, state_with(Portfolio(Decimal(1))), make_llm()) == list(FOUR_ANALYSTS)

    def test_dynamic_subset(self):
        cfg = make_config(planner_mode=PlannerMode.DYNAMIC)
        llm = make_llm([{"role": "Planner", "response": '{"analysts": ["Policy"]}'}])
        assert plan_analysts(cfg, state_with(Portfolio(Decimal(1))), llm) == [AnalystKind.POLICY]

    def test_dynamic_rule_planner_keeps_all(self):
        cfg = make_config(planner_mode=PlannerMode.DYNAMIC)
        assert plan_analysts(cfg, state_with(Portfolio(Decimal(1))), make_llm()) == list(FOUR_ANALYSTS)

    def test_dynamic_falls_back_on_garbage(self):
        cfg = make_config(planner_mode=PlannerMode.DYNAMIC)
        llm = make_llm([{"role": "Planner", "response": "whatever you think"}])
        assert plan_analysts(cfg, state_with(Portfolio(Decimal(1))), llm) == list(FOUR_ANALYSTS)


class TestStepDay:
    def test_one_day_layout(self, runs_dir):
        cfg = make_config(end_date=date(2025, 3, 17))
        summary, ledger = replay(cfg, runs_dir)
        kinds = [e.kind for e in ledger.load_run(cfg.run_id)]
        assert kinds == [EntryKind.SIGNAL] * 20 + [EntryKind.DECISION, EntryKind.TRADE] * 5 + [EntryKind.SNAPSHOT]
        assert summary.days == 1

    def test_memory_is_bounded(self):
        gateway = register_provider("replay", BUNDLED_FIXTURES)
        cfg = make_config(decision_memory_size=2)
        state = FundState(cfg.run_id, cfg.start_date, Portfolio(cfg.initial_cash), {}, {}, 2)
        days = gateway.trading_days(cfg.start_date, date(2025, 3, 20))
        clock = SimulationClock(days[0], ClockMode.REPLAY)
        for d in days:
            clock.advance_to(d)
            state = step_day(cfg, state, clock, gateway, make_llm())
        assert [m.date for m in state.memory_for("KO")] == [days[-1], days[-2]]

    def test_missing_ticker_names_it(self, runs_dir):
        cfg = make_config(universe=("AAPL", "ZZZZ"))
        with pytest.raises((UnknownTicker, NoPriceAvailable), match="ZZZZ"):
            replay(cfg, runs_dir)


class TestRunPeriod:
    def test_weekend_window_has_no_days(self, runs_dir):
        summary, _ = replay(make_config(start_date=date(2025, 3, 22), end_date=date(2025, 3, 23)), runs_dir)
        assert summary.days == 0 and summary.final_value == Decimal(100000)

    def test_resume_matches_single_pass(self, tmp_path):
        replay(make_config(end_date=date(2025, 3, 28)), tmp_path / "a")
        _, resumed = replay(make_config(), tmp_path / "a")
        _, single = replay(make_config(), tmp_path / "b")
        assert resumed.run_path("test-run").read_bytes() == single.run_path("test-run").read_bytes()

    def test_rerun_is_a_no_op(self, runs_dir):
        _, ledger = replay(make_config(end_date=date(2025, 3, 19)), runs_dir)
        before = ledger.run_path("test-run").read_bytes()
        summary, _ = replay(make_config(end_date=date(2025, 3, 19)), runs_dir)
        assert ledger.run_path("test-run").read_bytes() == before and summary.days == 3

    def test_mid_day_ledger_refuses_resume(self, runs_dir):
        _, ledger = replay(make_config(end_date=date(2025, 3, 18)), runs_dir)
        path = ledger.run_path("test-run")
        lines = path.read_text().splitlines(keepends=True)
        path.write_text("".join(lines[:-5]))
        with pytest.raises(CorruptLedger, match="part-way"):
            replay(make_config(), runs_dir)

    def test_live_mode_runs_only_today(self, runs_dir):
        from livefund.workflow import run_period

        ledger = Ledger(runs_dir, fsync=False)
        gateway = register_provider("replay", BUNDLED_FIXTURES)
        summary = run_period(make_config(), gateway, make_llm(), ledger, ClockMode.LIVE,
                             today=lambda: date(2025, 4, 3))
        assert summary.trading_days == [date(2025, 4, 3)]
