"""
Replaying a month of fund decisions
===================================

Runs the bundled five-stock fund over 24 trading days with the rule-based
scripted model, then walks through what the ledger recorded around the
early-April selloff and the tariff-pause rebound.

Run with ``python3 demos/replay_run.py``. Nothing touches the network.
"""

import tempfile
from collections import Counter
from datetime import date

from livefund.config import BUNDLED_CONFIG, build_gateway, build_llm, load_config
from livefund.ledger import EntryKind, Ledger
from livefund.workflow import run_period

##############################################################################
# Load the bundled configuration and point the ledger at a scratch directory.

runs = tempfile.mkdtemp(prefix="livefund-demo-")
app = load_config(BUNDLED_CONFIG, runs_dir=runs)
print("universe:", ", ".join(app.run.universe))
print("window:", app.run.start_date, "to", app.run.end_date)

##############################################################################
# One call runs every trading day. Each day appends its signals, decisions,
# trades and a portfolio snapshot to the run's JSON Lines ledger.

ledger = Ledger(app.runs_dir)
summary = run_period(app.run, build_gateway(app), build_llm(app), ledger)
print()
print("\n".join(summary.lines()))

##############################################################################
# Signal mix per analyst over the whole run.

entries = ledger.load_run(app.run.run_id)
mix = Counter((e.record.analyst.value, e.record.direction.value) for e in entries if e.kind is EntryKind.SIGNAL)
print()
for analyst in sorted({a for a, _ in mix}):
    counts = {d: mix[(analyst, d)] for d in ("Bullish", "Neutral", "Bearish")}
    print(f"{analyst:<12} {counts}")

##############################################################################
# Policy reads and CVX decisions across the selloff and the pause.

focus = [date(2025, 4, d) for d in (2, 3, 4, 8, 9, 10)]
print()
for e in entries:
    if e.date not in focus:
        continue
    r = e.record
    if e.kind is EntryKind.SIGNAL and r.ticker == "CVX" and r.analyst.value == "Policy":
        print(f"{e.date}  Policy on CVX: {r.direction.value:<8} {r.justification[:60]}")
    elif e.kind is EntryKind.DECISION and r.ticker == "CVX":
        print(f"{e.date}  manager: {r.describe()} at {r.price}")

##############################################################################
# Daily total value, as the metrics see it.

print()
for d, v in ledger.daily_value_series(app.run.run_id)[-6:]:
    print(d, v)
print("ledger file:", ledger.run_path(app.run.run_id))
