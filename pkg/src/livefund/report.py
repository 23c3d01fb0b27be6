"""Leaderboard files: CSV, JSON, a static HTML table and per-run value series."""

from __future__ import annotations

import csv
import html
import io
import json
import logging
from datetime import date, datetime, timezone
from pathlib import Path
from typing import Sequence

from livefund.domain import money_str
from livefund.errors import UnknownTicker
from livefund.ledger import Ledger, value_series
from livefund.market.replay import ReplayProvider
from livefund.metrics import MetricParams, MetricReport, ReturnSeries, build_report

log = logging.getLogger(__name__)

COLUMNS = (
    "model",
    "cr_pct",
    "cr_bnh_pct",
    "sr",
    "mdd_pct",
    "wr_pct",
    "beta",
    "alpha",
    "signal_validity",
    "decision_validity",
)


def benchmark_series(source: str | Path, fixtures: str | Path | None = None) -> ReturnSeries:
    """Closing-price series for the benchmark.

    ``source`` is either a ticker inside ``fixtures`` or a fixture directory
    holding a single ticker named by its last path component.
    """
    path = Path(source)
    if path.is_dir() and (path / "ohlcv.jsonl").exists():
        provider, ticker = ReplayProvider(path.parent), path.name
    elif fixtures is not None:
        provider, ticker = ReplayProvider(fixtures), str(source)
    else:
        raise UnknownTicker(f"cannot locate benchmark {source}")
    bars = provider.ohlcv(ticker, date.max, 10**9)
    return ReturnSeries(tuple(b.date for b in bars), tuple(b.close for b in bars))


def run_report(ledger: Ledger, run_id: str, params: MetricParams = MetricParams(), label: str | None = None) -> MetricReport:
    meta = ledger.run_meta(run_id)
    entries = ledger.load_run(run_id)
    return build_report(entries, label or meta.get("model", run_id), params, run_id)


def _cell(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return f"{value:.6f}"
    return str(value)


def rank(reports: Sequence[MetricReport]) -> list[MetricReport]:
    """Highest cumulative return first; ties keep input order."""
    return sorted(reports, key=lambda r: -r.cr)


def leaderboard_csv(reports: Sequence[MetricReport]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(COLUMNS)
    for r in rank(reports):
        row = r.row()
        writer.writerow([_cell(row[c]) for c in COLUMNS])
    return buf.getvalue()


def _json_value(value):
    return round(value, 10) if isinstance(value, float) else value


def report_dict(r: MetricReport) -> dict:
    out = {k: _json_value(v) for k, v in r.row().items()}
    out.update(
        days=r.days,
        signals=r.validity.signals,
        valid_signals=r.validity.valid_signals,
        decisions=r.validity.decisions,
        valid_decisions=r.validity.valid_decisions,
        consistency_rate=_json_value(r.consistency_rate),
        effectiveness_rate=_json_value(r.effectiveness_rate),
        distributions=r.distributions.to_dict(),
    )
    return out


def leaderboard_json(reports: Sequence[MetricReport]) -> str:
    body = {"columns": list(COLUMNS), "rows": [report_dict(r) for r in rank(reports)]}
    return json.dumps(body, indent=2, sort_keys=True) + "\n"


def leaderboard_html(reports: Sequence[MetricReport], timestamp: bool = True) -> str:
    head = "".join(f"<th>{html.escape(c)}</th>" for c in ("rank",) + COLUMNS)
    rows = []
    for i, r in enumerate(rank(reports), start=1):
        row = r.row()
        cells = "".join(f"<td>{html.escape(_cell(row[c]))}</td>" for c in COLUMNS)
        rows.append(f"    <tr><td>{i}</td>{cells}</tr>")
    stamp = ""
    if timestamp:
        stamp = f"<!-- generated {datetime.now(timezone.utc).isoformat(timespec='seconds')} -->\n"
    return (
        "<!DOCTYPE html>\n"
        f"{stamp}"
        "<html lang=\"en\">\n<head>\n<meta charset=\"utf-8\">\n<title>Leaderboard</title>\n"
        "<style>table{border-collapse:collapse}th,td{border:1px solid #999;padding:4px 8px;"
        "text-align:right}td:nth-child(2){text-align:left}</style>\n"
        "</head>\n<body>\n<h1>Leaderboard</h1>\n<table>\n"
        f"  <thead><tr>{head}</tr></thead>\n  <tbody>\n"
        + "\n".join(rows)
        + "\n  </tbody>\n</table>\n</body>\n</html>\n"
    )


def series_csv(points: Sequence[tuple[date, object]]) -> str:
    lines = ["date,total_value"] + [f"{d.isoformat()},{money_str(v)}" for d, v in points]
    return "\n".join(lines) + "\n"


def _unique_labels(ledger: Ledger, run_ids: Sequence[str]) -> dict[str, str]:
    models = {rid: ledger.run_meta(rid).get("model", rid) for rid in run_ids}
    seen: dict[str, int] = {}
    for m in models.values():
        seen[m] = seen.get(m, 0) + 1
    return {rid: (m if seen[m] == 1 else f"{m} [{rid}]") for rid, m in models.items()}


def write_report(
    ledger: Ledger,
    run_ids: Sequence[str],
    out_dir: str | Path,
    params: MetricParams = MetricParams(),
    timestamp: bool = True,
) -> list[MetricReport]:
    """Write the leaderboard files for ``run_ids`` into ``out_dir``."""
    labels = _unique_labels(ledger, run_ids)
    reports = [run_report(ledger, rid, params, labels[rid]) for rid in run_ids]
    out = Path(out_dir)
    (out / "series").mkdir(parents=True, exist_ok=True)
    (out / "leaderboard.csv").write_text(leaderboard_csv(reports), encoding="utf-8")
    (out / "leaderboard.json").write_text(leaderboard_json(reports), encoding="utf-8")
    (out / "leaderboard.html").write_text(leaderboard_html(reports, timestamp), encoding="utf-8")
    for rid in run_ids:
        points = value_series(ledger.load_run(rid), rid)
        (out / "series" / f"{rid}.csv").write_text(series_csv(points), encoding="utf-8")
    return reports


def describe(r: MetricReport) -> list[str]:
    def fmt(v, suffix=""):
        return "n/a" if v is None else f"{v:.4f}{suffix}"

    return [
        f"model: {r.model}",
        f"days: {r.days}",
        f"CR: {fmt(r.cr, '%')}   CR buy&hold: {fmt(r.cr_bnh, '%')}",
        f"SR: {fmt(r.sr)}   MDD: {fmt(r.mdd, '%')}   WR: {fmt(r.wr, '%')}",
        f"beta: {fmt(r.beta)}   alpha: {fmt(r.alpha)}",
        f"signal validity: {r.validity.signal_rate:.2%} of {r.validity.signals}",
        f"decision validity: {r.validity.decision_rate:.2%} of {r.validity.decisions}",
    ]

