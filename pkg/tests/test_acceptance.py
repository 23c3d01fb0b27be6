"""Exit criteria for the package, one test per criterion.

Each test prints a single ``PASS``/``FAIL`` line with the measured figure
before asserting, so ``pytest -v -s`` (or the captured log) reads as a
checklist.
"""

import math
import random
import shutil
import time
from datetime import date
from decimal import Decimal

import numpy as np
import pytest

from conftest import BUNDLED_FIXTURES, START, make_config, make_llm, replay
from livefund.cli import main
from livefund.config import BUNDLED_CONFIG
from livefund.domain import (
    DECISION_ERROR_TEXT,
    SIGNAL_ERROR_TEXT,
    Decision,
    DecisionAction,
    FundState,
    Portfolio,
    Position,
)
from livefund.errors import InsufficientData, LeakageViolation
from livefund.ledger import EntryKind, Ledger
from livefund.market import ClockMode, SimulationClock
from livefund.market.gateway import register_provider
from livefund.metrics import (
    MetricParams,
    ReturnSeries,
    alpha,
    beta,
    build_report,
    classify_consistency,
    classify_effectiveness,
    cumulative_return,
    max_drawdown,
    sharpe_ratio,
)
from livefund.workflow import RiskParams, step_day
from test_market import LEAKS, plant_leak
from test_metrics import CONSISTENCY_GOLDEN, EFFECTIVENESS_GOLDEN, dec


@pytest.fixture
def verdict(capsys):
    def emit(name, ok, detail):
        with capsys.disabled():
            print(f"\n{'PASS' if ok else 'FAIL'}  {name}: {detail}")
        assert ok, detail

    return emit


def kinds(ledger, run_id):
    return [e.kind for e in ledger.load_run(run_id)]


# --- metric oracles -----------------------------------------------------------


def mdd_brute(v):
    """Every (peak, trough) pair with the peak first; O(n^2) by construction."""
    v = np.asarray(v)
    drops = (v[:, None] - v[None, :]) / v[:, None]
    return float(np.triu(drops).max() * 100)


def sharpe_direct(v, rf):
    r = [b / a - 1 - rf for a, b in zip(v, v[1:])]
    m = math.fsum(r) / len(r)
    sd = math.sqrt(math.fsum((x - m) ** 2 for x in r) / (len(r) - 1))
    return m / sd * math.sqrt(252)


def beta_direct(v, w):
    rs = [b / a - 1 for a, b in zip(v, v[1:])]
    rm = [b / a - 1 for a, b in zip(w, w[1:])]
    ms, mm = math.fsum(rs) / len(rs), math.fsum(rm) / len(rm)
    return math.fsum((x - ms) * (y - mm) for x, y in zip(rs, rm)) / math.fsum((y - mm) ** 2 for y in rm)


def alpha_direct(v, w, rf_annual=0.0429):
    rf = rf_annual * (len(v) - 1) / 252
    return (v[-1] / v[0] - 1) - (rf + beta_direct(v, w) * (w[-1] / w[0] - 1 - rf))


def close(a, b, tol=1e-9):
    return abs(a - b) <= tol * max(1.0, abs(b))


def test_metric_oracle_suite(verdict):
    rng = np.random.default_rng(20250417)
    rf = MetricParams().rf_daily
    t0 = time.perf_counter()
    bad = []
    for i in range(1000):
        n = int(rng.integers(2, 201))
        v = [float(x) for x in np.round(100000 * np.cumprod(1 + rng.normal(0.0005, 0.02, n)), 2)]
        w = [float(x) for x in np.round(5000 * np.cumprod(1 + rng.normal(0.0003, 0.015, n)), 2)]
        s = ReturnSeries.from_values([Decimal(repr(x)) for x in v])
        m = ReturnSeries.from_values([Decimal(repr(x)) for x in w])
        if not close(max_drawdown(s), mdd_brute(v)):
            bad.append((i, "mdd"))
        if n < 3:
            with pytest.raises(InsufficientData):
                sharpe_ratio(s)
            continue
        if not close(sharpe_ratio(s), sharpe_direct(v, rf)):
            bad.append((i, "sr"))
        if not close(beta(s, m), beta_direct(v, w)):
            bad.append((i, "beta"))
        if not close(alpha(s, m), alpha_direct(v, w)):
            bad.append((i, "alpha"))
    elapsed = time.perf_counter() - t0
    verdict("metric oracle suite", not bad and elapsed < 10,
            f"1000 series, {len(bad)} mismatches at 1e-9, {elapsed:.2f}s")


def test_cr_anchor(verdict):
    cr = cumulative_return(ReturnSeries.from_values([Decimal(100000), Decimal(101100)]))
    single = cumulative_return(ReturnSeries.from_values([Decimal(100000)]))
    verdict("CR anchor", cr == 1.1 and f"{cr:+.2f}%" == "+1.10%" and single == 0.0,
            f"100000->101100 gives {cr:+.2f}%, single point gives {single}%")


# --- run structure ------------------------------------------------------------


def test_cardinality(verdict, runs_dir):
    summary, ledger = replay(make_config(), runs_dir)
    k = kinds(ledger, "test-run")
    n_sig, n_dec = k.count(EntryKind.SIGNAL), k.count(EntryKind.DECISION)
    verdict("cardinality", (summary.days, n_sig, n_dec) == (24, 480, 120),
            f"{summary.days} days, {n_sig} signals, {n_dec} decisions in the ledger")


def test_validity_reproduction(verdict, tmp_path):
    sigs, decs = [], []
    for seed in range(1, 10):
        llm = make_llm(default="rules", failure_rates={"signal": 0.04, "decision": 0.02}, seed=seed)
        _, ledger = replay(make_config(f"seed-{seed}"), tmp_path / f"s{seed}", llm)
        for e in ledger.load_run(f"seed-{seed}"):
            if e.kind is EntryKind.SIGNAL:
                sigs.append(e.record)
            elif e.kind is EntryKind.DECISION:
                decs.append(e.record)
    sv = 100 * sum(s.valid for s in sigs) / len(sigs)
    dv = 100 * sum(d.valid for d in decs) / len(decs)
    sentinels = all(s.justification == SIGNAL_ERROR_TEXT for s in sigs if not s.valid) and all(
        d.justification == DECISION_ERROR_TEXT and d.action is DecisionAction.HOLD for d in decs if not d.valid
    )
    ok = len(sigs) >= 4320 and abs(sv - 96) <= 1.0 and abs(dv - 98) <= 1.5 and sentinels
    verdict("validity reproduction", ok,
            f"signals {sv:.2f}% of {len(sigs)}, decisions {dv:.2f}% of {len(decs)}, sentinels exact: {sentinels}")


def test_determinism(verdict, tmp_path):
    def run(where, workers):
        llm = make_llm(default="rules", failure_rates={"signal": 0.1, "decision": 0.05}, seed=11)
        _, ledger = replay(make_config("det", max_workers=workers), tmp_path / where, llm)
        return ledger.run_path("det").read_bytes()

    a, b, c = run("a", 1), run("b", 1), run("c", 20)
    verdict("determinism", a == b == c, f"{len(a)}-byte ledgers; repeat identical: {a == b}, 1 vs 20 workers identical: {a == c}")


ALL_SIX = '["Technical", "CompanyNews", "Policy", "Insider", "Fundamental", "MacroEconomic"]'


def test_leakage_guard(verdict, tmp_path):
    codes = {}
    for kind in sorted(LEAKS):
        root = tmp_path / kind
        shutil.copytree(BUNDLED_FIXTURES, root / "fixtures")
        plant_leak(root / "fixtures", kind)
        cfg = root / "leak.toml"
        cfg.write_text(
            "[run]\n"
            f'run_id = "leak-{kind}"\nuniverse = ["KO", "CVX"]\n'
            "start_date = 2025-03-17\nend_date = 2025-03-18\n"
            f"analysts = {ALL_SIX}\n\n"
            '[model]\nprovider = "stub"\nmodel_id = "scripted-stub"\n\n'
            '[providers.stub]\nkind = "stub"\ndefault = "rules"\n\n'
            '[data]\nfixtures = "fixtures"\n'
        )
        codes[kind] = main(["run", "--config", str(cfg), "--runs-dir", str(root / "runs")])
    caught = sum(c == LeakageViolation.exit_code for c in codes.values())
    verdict("leakage guard", caught == 6, f"{caught}/6 data kinds aborted with exit {LeakageViolation.exit_code}: {codes}")


# --- accounting ---------------------------------------------------------------


def test_conservation(verdict, runs_dir):
    config = make_config()
    _, ledger = replay(config, runs_dir)
    entries = ledger.load_run(config.run_id)
    trades = [e.record for e in entries if e.kind is EntryKind.TRADE]
    bought = sum(t.executed_shares * t.price for t in trades if t.action is DecisionAction.BUY)
    sold = sum(t.executed_shares * t.price for t in trades if t.action is DecisionAction.SELL)
    final = [e.record for e in entries if e.kind is EntryKind.SNAPSHOT][-1].portfolio
    expected = config.initial_cash - bought + sold
    snaps = [e.record.portfolio for e in entries if e.kind is EntryKind.SNAPSHOT]
    never_negative = all(p.cash >= 0 and all(pos.shares >= 0 for pos in p.positions.values()) for p in snaps)
    n_trades = sum(t.executed_shares > 0 for t in trades)
    verdict("conservation", final.cash == expected and never_negative,
            f"final cash {final.cash} vs {expected} over {n_trades} executed trades; non-negative: {never_negative}")


def test_buy_and_hold_identity(verdict, runs_dir):
    config = make_config("bnh")
    script = [
        {"role": "Manager", "ticker": t, "date": START.isoformat(),
         "response": {"action": "Buy", "shares": 40, "justification": "initial allocation"}}
        for t in config.universe
    ]
    _, ledger = replay(config, runs_dir, make_llm(script, default="neutral"))
    entries = ledger.load_run("bnh")
    report = build_report(entries, "bnh")
    executed_days = {e.date for e in entries if e.kind is EntryKind.TRADE and e.record.executed_shares}
    verdict("buy-and-hold identity", report.cr == report.cr_bnh and executed_days == {START},
            f"CR {report.cr!r} vs CR_bnh {report.cr_bnh!r}; trades only on {sorted(executed_days)}")


def test_sell_27_scenario(verdict, runs_dir):
    day = date(2025, 4, 3)
    price = Decimal("156.12")
    holding = Position("CVX", 184, Decimal("150.00"))
    cash = Decimal(100000) - 184 * price
    # target weight (184 - 27) * 156.12 / total, with total value 100000
    risk = RiskParams(tilt_factor=Decimal("0.5"), max_weight=(184 - 27) * price / Decimal(100000))
    config = make_config("f2", risk_params=risk)
    bullish = {"signal": "Bullish", "justification": "supportive backdrop"}
    script = [{"role": k.value, "ticker": "CVX", "date": day.isoformat(), "response": bullish}
              for k in config.analyst_set]
    script.append({"role": "Manager", "ticker": "CVX", "date": day.isoformat(),
                   "response": {"action": "Sell", "shares": 27, "price": 156.12,
                                "justification": "trim toward the target position"}})
    ledger = Ledger(runs_dir, fsync=False)
    ledger.register_run("f2")
    gateway = register_provider("replay", BUNDLED_FIXTURES)
    prompts = {}
    state = FundState("f2", day, Portfolio(cash, {"CVX": holding}, day), {}, {}, 5)
    step_day(config, state, SimulationClock(day, ClockMode.REPLAY), gateway, make_llm(script), ledger,
             prompt_hook=lambda t, system, user: prompts.setdefault(t, user))
    decision = next(e.record for e in ledger.load_run("f2") if e.kind is EntryKind.DECISION and e.record.ticker == "CVX")
    line = next(l for l in prompts["CVX"].splitlines() if l.startswith("Tradable Shares:"))
    tradable = int(line.split(":")[1])
    expected = Decision("CVX", day, DecisionAction.SELL, 27, price, "trim toward the target position")
    verdict("sell-27 scenario", decision == expected and tradable < 0,
            f"ledger {decision.describe()} at {decision.price}; prompt shows '{line}'")


# --- classifiers --------------------------------------------------------------


def test_classifier_golden_table(verdict):
    failures = [i for i, (s, a, want) in enumerate(CONSISTENCY_GOLDEN) if classify_consistency(s, dec(a)).consistent is not want]
    failures += [f"e{i}" for i, (d, nxt, want) in enumerate(EFFECTIVENESS_GOLDEN)
                 if classify_effectiveness(d, None if nxt is None else Decimal(nxt)) is not want]
    rng = random.Random(500)
    unstable = 0
    for _ in range(500):
        signals, action, _want = rng.choice(CONSISTENCY_GOLDEN)
        shuffled = list(signals)
        rng.shuffle(shuffled)
        unstable += classify_consistency(shuffled, dec(action)) != classify_consistency(signals, dec(action))
    total = len(CONSISTENCY_GOLDEN) + len(EFFECTIVENESS_GOLDEN)
    verdict("classifier golden table", not failures and not unstable and total == 20,
            f"{total - len(failures)}/{total} golden cases, {unstable} of 500 shuffles changed a verdict")


# --- runtime ------------------------------------------------------------------


def test_end_to_end_runtime(verdict, tmp_path, capsys):
    t0 = time.perf_counter()
    code = main(["run", "--config", str(BUNDLED_CONFIG), "--runs-dir", str(tmp_path)])
    elapsed = time.perf_counter() - t0
    out = capsys.readouterr().out
    verdict("end-to-end runtime", code == 0 and "days: 24" in out and elapsed < 10,
            f"24-day 5-ticker replay in {elapsed:.2f}s (exit {code})")
