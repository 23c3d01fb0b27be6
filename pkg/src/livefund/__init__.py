"""Live-market evaluation of LLM-managed equity funds.

A planner picks analysts, analysts turn market data into signals, and a
portfolio manager turns signals into trades. Every record lands in an
append-only ledger that the metrics layer scores.
"""

__version__ = "0.1.0"
