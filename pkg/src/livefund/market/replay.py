"""Deterministic replay provider backed by a JSON Lines fixture directory.

Layout::

    <root>/manifest.json
    <root>/<TICKER>/ohlcv.jsonl | news.jsonl | insider.jsonl | fundamentals.jsonl
    <root>/_policy/news.jsonl
    <root>/_macro/indicators.jsonl

Every record may carry an ``available_on`` date saying when the data vendor
made it visible; it defaults to the record's own date. The provider serves
whatever was visible on the query date, exactly as a recorded live feed
would. It does *not* police record dates; that is the gateway's job.
"""

from __future__ import annotations

import json
import threading
from dataclasses import dataclass, field
from datetime import date
from pathlib import Path
from typing import Callable

from livefund.errors import UnknownTicker
from livefund.market.models import (
    FundamentalsSnapshot,
    InsiderTransaction,
    MacroIndicator,
    NewsItem,
    NewsScope,
    OHLCVBar,
)

POLICY_DIR = "_policy"
MACRO_DIR = "_macro"
MANIFEST = "manifest.json"

FILE_PARSERS: dict[str, Callable] = {
    "ohlcv.jsonl": OHLCVBar.from_dict,
    "news.jsonl": NewsItem.from_dict,
    "insider.jsonl": InsiderTransaction.from_dict,
    "fundamentals.jsonl": FundamentalsSnapshot.from_dict,
    "indicators.jsonl": MacroIndicator.from_dict,
}


def _record_date(rec) -> date:
    return rec.date


def read_jsonl(path: Path, parser: Callable) -> list[tuple[date, object]]:
    """Parse a fixture file into ``(available_on, record)`` pairs."""
    out = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            raw = json.loads(line)
            rec = parser(raw)
            avail = raw.get("available_on")
            out.append((date.fromisoformat(avail) if avail else _record_date(rec), rec))
    return out


class ReplayProvider:
    kind = "replay"

    def __init__(self, root: str | Path):
        self.root = Path(root)
        if not self.root.is_dir():
            raise FileNotFoundError(f"fixture directory not found: {self.root}")
        manifest = self.root / MANIFEST
        self.manifest = json.loads(manifest.read_text()) if manifest.exists() else {}
        self._files: dict[Path, list] = {}
        self._lock = threading.Lock()

    def _records(self, *parts: str) -> list[tuple[date, object]] | None:
        path = self.root.joinpath(*parts)
        with self._lock:
            if path not in self._files:
                self._files[path] = read_jsonl(path, FILE_PARSERS[path.name]) if path.exists() else None
            return self._files[path]

    @staticmethod
    def _visible(records, as_of: date) -> list:
        return [rec for avail, rec in records or () if avail <= as_of]

    def tickers(self) -> list[str]:
        listed = self.manifest.get("tickers")
        if listed:
            return sorted(listed)
        return sorted(p.name for p in self.root.iterdir() if p.is_dir() and not p.name.startswith("_"))

    def ohlcv(self, ticker: str, as_of: date, window: int) -> list[OHLCVBar]:
        records = self._records(ticker, "ohlcv.jsonl")
        if records is None:
            raise UnknownTicker(f"no OHLCV fixture for ticker {ticker}")
        bars = sorted(self._visible(records, as_of), key=_record_date)
        return bars[-window:]

    def _latest(self, records, as_of: date, count: int) -> list:
        items = self._visible(records, as_of)
        # stable sort keeps file order within a day, newest day first
        items = sorted(items, key=_record_date, reverse=True)
        return items[:count]

    def company_news(self, ticker: str, as_of: date, count: int) -> list[NewsItem]:
        items = self._latest(self._records(ticker, "news.jsonl"), as_of, None)
        return [n for n in items if n.scope is NewsScope.COMPANY][:count]

    def policy_news(self, as_of: date, count: int) -> list[NewsItem]:
        return self._latest(self._records(POLICY_DIR, "news.jsonl"), as_of, count)

    def insider(self, ticker: str, as_of: date, count: int) -> list[InsiderTransaction]:
        return self._latest(self._records(ticker, "insider.jsonl"), as_of, count)

    def fundamentals(self, ticker: str, as_of: date) -> list[FundamentalsSnapshot]:
        return self._visible(self._records(ticker, "fundamentals.jsonl"), as_of)

    def macro(self, as_of: date, count: int) -> list[MacroIndicator]:
        return self._latest(self._records(MACRO_DIR, "indicators.jsonl"), as_of, count)

    def trading_days(self, start: date, end: date, tickers=None) -> list[date]:
        """Union of OHLCV dates across ``tickers`` inside ``[start, end]``."""
        days: set[date] = set()
        for t in tickers or self.tickers():
            records = self._records(t, "ohlcv.jsonl")
            if records is None:
                raise UnknownTicker(f"no OHLCV fixture for ticker {t}")
            days.update(r.date for _, r in records if start <= r.date <= end)
        return sorted(days)


# --- fixture validation -------------------------------------------------


@dataclass
class FileVerdict:
    path: str
    problems: list[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.problems


_UNIQUE_DATES = {"ohlcv.jsonl", "fundamentals.jsonl"}


def _check_file(path: Path, rel: str) -> tuple[FileVerdict, list]:
    verdict = FileVerdict(rel)
    parser = FILE_PARSERS[path.name]
    records = []
    prev = None
    seen: set = set()
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                raw = json.loads(line)
                rec = parser(raw)
            except (ValueError, KeyError, TypeError) as exc:
                verdict.problems.append(f"line {lineno}: {exc}")
                continue
            d = _record_date(rec)
            key = (getattr(rec, "name", None), d)
            if prev is not None and d < prev:
                verdict.problems.append(f"line {lineno}: out of order ({d} after {prev})")
            if path.name in _UNIQUE_DATES or path.name == "indicators.jsonl":
                if key in seen:
                    verdict.problems.append(f"line {lineno}: duplicate date {d}")
                seen.add(key)
            prev = d if prev is None else max(prev, d)
            records.append(rec)
    return verdict, records


def validate_fixture_dir(root: str | Path) -> list[FileVerdict]:
    """Check ordering, record invariants, duplicates and manifest coverage."""
    root = Path(root)
    verdicts: list[FileVerdict] = []
    if not root.is_dir():
        return [FileVerdict(str(root), [f"fixture directory not found: {root}"])]
    ohlcv_ranges: dict[str, tuple[date, date]] = {}
    for path in sorted(root.rglob("*.jsonl")):
        rel = str(path.relative_to(root))
        if path.name not in FILE_PARSERS:
            verdicts.append(FileVerdict(rel, ["unrecognized fixture file name"]))
            continue
        verdict, records = _check_file(path, rel)
        verdicts.append(verdict)
        if path.name == "ohlcv.jsonl" and records:
            ohlcv_ranges[path.parent.name] = (records[0].date, records[-1].date)

    manifest_path = root / MANIFEST
    mv = FileVerdict(MANIFEST)
    if not manifest_path.exists():
        mv.problems.append("manifest.json missing")
    else:
        try:
            manifest = json.loads(manifest_path.read_text())
        except ValueError as exc:
            manifest = {}
            mv.problems.append(f"unparseable manifest: {exc}")
        for ticker, cover in sorted(manifest.get("tickers", {}).items()):
            if ticker not in ohlcv_ranges:
                mv.problems.append(f"ticker {ticker} listed but {ticker}/ohlcv.jsonl missing or empty")
                continue
            first, last = ohlcv_ranges[ticker]
            want_start = date.fromisoformat(cover["start"])
            want_end = date.fromisoformat(cover["end"])
            if first > want_start or last < want_end:
                mv.problems.append(
                    f"ticker {ticker} covers {first}..{last}, manifest declares {want_start}..{want_end}"
                )
        for ticker in sorted(set(ohlcv_ranges) - set(manifest.get("tickers", {}))):
            mv.problems.append(f"ticker {ticker} has fixtures but is not in the manifest")
    verdicts.append(mv)
    return verdicts
