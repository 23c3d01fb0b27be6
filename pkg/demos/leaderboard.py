"""
Scoring runs against a benchmark
================================

Two funds share the same fixtures: one follows the rule-based manager, the
other holds cash because every reply is Hold. We score both against the
SPY fixture and build the leaderboard files.

Run with ``python3 demos/leaderboard.py``.
"""

import tempfile
from dataclasses import replace
from pathlib import Path

from livefund.config import BUNDLED_CONFIG, build_gateway, build_llm, load_config
from livefund.ledger import Ledger
from livefund.metrics import MetricParams, ReturnSeries, max_drawdown, sharpe_ratio
from livefund.report import benchmark_series, describe, leaderboard_csv, write_report
from livefund.workflow import run_period

runs = Path(tempfile.mkdtemp(prefix="livefund-board-"))
app = load_config(BUNDLED_CONFIG, runs_dir=str(runs))
ledger = Ledger(runs)

##############################################################################
# The active fund uses the bundled stub; the idle one answers Hold to
# everything, so its value never moves.

run_period(app.run, build_gateway(app), build_llm(app), ledger)

idle = replace(app, run=replace(app.run, run_id="stub-idle"),
               providers={**app.providers, "stub": {"kind": "stub", "default": "neutral"}})
run_period(idle.run, build_gateway(idle), build_llm(idle), ledger, meta={"model": "always-hold"})

##############################################################################
# Metrics for a single run. Beta and alpha need the benchmark closes.

params = MetricParams(market_series=benchmark_series("SPY", app.fixtures))
reports = write_report(ledger, ["stub-rules", "stub-idle"], runs / "report", params, timestamp=False)
for r in reports:
    print("\n".join(describe(r)))
    print()

##############################################################################
# The same numbers can be had from a bare value series.

toy = ReturnSeries.from_values([100000, 101500, 99800, 102300, 101100])
print(f"toy series: SR {sharpe_ratio(toy):.3f}, MDD {max_drawdown(toy):.3f}%")

##############################################################################
# The leaderboard ranks by cumulative return.

print()
print(leaderboard_csv(reports))
print("report files:", sorted(p.name for p in (runs / "report").iterdir()))
