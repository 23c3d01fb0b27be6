"""Append-only run ledger: one JSON Lines file per run plus a registry.

Each line is a canonical JSON object carrying a sequence number and a
checksum of the rest of the line. Loading verifies both; any damage is
reported as :class:`CorruptLedger`, never skipped.
"""

from __future__ import annotations

import hashlib
import json
import logging
import os
import threading
from dataclasses import dataclass, field
from datetime import date
from decimal import Decimal
from enum import Enum
from pathlib import Path
from typing import Iterable, Mapping, Union

from livefund.domain import Decision, Portfolio, Signal, TradeRecord, canonical_json, money_str
from livefund.errors import CorruptLedger, EmptyRun, MissingPrice, StorageFailure, UnknownRun

log = logging.getLogger(__name__)

REGISTRY = "registry.json"


def portfolio_value(portfolio: Portfolio, prices: Mapping[str, Decimal]) -> Decimal:
    """Cash plus every holding marked at ``prices``."""
    total = portfolio.cash
    for ticker, pos in portfolio.positions.items():
        if pos.shares == 0:
            continue
        if ticker not in prices:
            raise MissingPrice(f"no price for held ticker {ticker}")
        total += pos.shares * prices[ticker]
    return total


@dataclass(frozen=True)
class PortfolioSnapshot:
    portfolio: Portfolio
    total_value: Decimal
    prices: Mapping[str, Decimal] = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "portfolio": self.portfolio.to_dict(),
            "total_value": money_str(self.total_value),
            "prices": {k: money_str(v) for k, v in sorted(self.prices.items())},
        }

    @classmethod
    def from_dict(cls, d: Mapping) -> "PortfolioSnapshot":
        return cls(
            Portfolio.from_dict(d["portfolio"]),
            Decimal(d["total_value"]),
            {k: Decimal(v) for k, v in d.get("prices", {}).items()},
        )


class EntryKind(str, Enum):
    SIGNAL = "SignalRecord"
    DECISION = "DecisionRecord"
    TRADE = "TradeRecord"
    SNAPSHOT = "PortfolioSnapshot"


_CODECS = {
    EntryKind.SIGNAL: Signal,
    EntryKind.DECISION: Decision,
    EntryKind.TRADE: TradeRecord,
    EntryKind.SNAPSHOT: PortfolioSnapshot,
}

Record = Union[Signal, Decision, TradeRecord, PortfolioSnapshot]


def kind_of(record: Record) -> EntryKind:
    for kind, cls in _CODECS.items():
        if isinstance(record, cls):
            return kind
    raise TypeError(f"cannot ledger a {type(record).__name__}")


@dataclass(frozen=True)
class LedgerEntry:
    run_id: str
    date: date
    record: Record
    sequence_no: int | None = None

    @property
    def kind(self) -> EntryKind:
        return kind_of(self.record)

    def body(self) -> dict:
        return {
            "seq": self.sequence_no,
            "run_id": self.run_id,
            "date": self.date.isoformat(),
            "kind": self.kind.value,
            "payload": self.record.to_dict(),
        }


def _checksum(body: dict) -> str:
    return hashlib.sha256(canonical_json(body).encode("utf-8")).hexdigest()[:16]


def encode_line(entry: LedgerEntry) -> str:
    body = entry.body()
    body["checksum"] = _checksum(body)
    return canonical_json(body) + "\n"


def decode_line(line: str, where: str) -> LedgerEntry:
    try:
        body = json.loads(line)
        checksum = body.pop("checksum")
    except (ValueError, KeyError, AttributeError, TypeError) as exc:
        raise CorruptLedger(f"{where}: unparseable entry ({exc})") from exc
    if _checksum(body) != checksum:
        raise CorruptLedger(f"{where}: checksum mismatch")
    try:
        kind = EntryKind(body["kind"])
        record = _CODECS[kind].from_dict(body["payload"])
        return LedgerEntry(body["run_id"], date.fromisoformat(body["date"]), record, int(body["seq"]))
    except (ValueError, KeyError, TypeError) as exc:
        raise CorruptLedger(f"{where}: invalid record ({exc})") from exc


class Ledger:
    """Ledger store rooted at a directory (``runs/`` by convention).

    One writer per run; appends are serialized by a lock.
    """

    def __init__(self, root: str | os.PathLike, fsync: bool = True):
        self.root = Path(root)
        self.fsync = fsync
        self._lock = threading.Lock()
        self._next_seq: dict[str, int] = {}

    # registry

    def _registry_path(self) -> Path:
        return self.root / REGISTRY

    def registry(self) -> dict:
        path = self._registry_path()
        if not path.exists():
            return {}
        try:
            return json.loads(path.read_text(encoding="utf-8")).get("runs", {})
        except ValueError as exc:
            raise CorruptLedger(f"{path}: unparseable registry ({exc})") from exc

    def run_path(self, run_id: str) -> Path:
        return self.root / f"{run_id}.jsonl"

    def has_run(self, run_id: str) -> bool:
        return run_id in self.registry()

    def register_run(self, run_id: str, meta: Mapping | None = None) -> None:
        """Register ``run_id``; an existing run keeps its ledger (resume)."""
        with self._lock:
            try:
                self.root.mkdir(parents=True, exist_ok=True)
                runs = self.registry()
                if run_id not in runs:
                    runs[run_id] = dict(meta or {})
                    tmp = self._registry_path().with_suffix(".tmp")
                    tmp.write_text(json.dumps({"runs": runs}, indent=2, sort_keys=True) + "\n", encoding="utf-8")
                    os.replace(tmp, self._registry_path())
                self.run_path(run_id).touch(exist_ok=True)
            except OSError as exc:
                raise StorageFailure(f"cannot register run {run_id}: {exc}") from exc

    def run_meta(self, run_id: str) -> dict:
        runs = self.registry()
        if run_id not in runs:
            raise UnknownRun(f"unknown run {run_id!r}")
        return runs[run_id]

    # writes

    def _seq_after(self, run_id: str) -> int:
        if run_id not in self._next_seq:
            entries = self.load_run(run_id)
            self._next_seq[run_id] = (entries[-1].sequence_no if entries else 0) + 1
        return self._next_seq[run_id]

    def append(self, run_id: str, entry: LedgerEntry | Record, day: date | None = None) -> int:
        return self.append_many(run_id, [entry], day)[-1]

    def append_many(self, run_id: str, entries: Iterable[LedgerEntry | Record], day: date | None = None) -> list[int]:
        """Append entries in order; returns their sequence numbers."""
        if not self.has_run(run_id):
            raise UnknownRun(f"unknown run {run_id!r}")
        with self._lock:
            seq = self._seq_after(run_id)
            lines, seqs = [], []
            for e in entries:
                if not isinstance(e, LedgerEntry):
                    if day is None:
                        raise ValueError("records appended without a date")
                    e = LedgerEntry(run_id, day, e)
                e = LedgerEntry(run_id, e.date, e.record, seq)
                lines.append(encode_line(e))
                seqs.append(seq)
                seq += 1
            try:
                with open(self.run_path(run_id), "a", encoding="utf-8") as fh:
                    fh.write("".join(lines))
                    fh.flush()
                    if self.fsync:
                        os.fsync(fh.fileno())
            except OSError as exc:
                raise StorageFailure(f"append to {run_id} failed: {exc}") from exc
            self._next_seq[run_id] = seq
            return seqs

    # reads

    def load_run(self, run_id: str) -> list[LedgerEntry]:
        path = self.run_path(run_id)
        if not self.has_run(run_id):
            raise UnknownRun(f"unknown run {run_id!r}")
        if not path.exists():
            return []
        text = path.read_text(encoding="utf-8")
        if text and not text.endswith("\n"):
            raise CorruptLedger(f"{path}: last line is truncated")
        entries: list[LedgerEntry] = []
        prev = 0
        for lineno, line in enumerate(text.splitlines(), start=1):
            entry = decode_line(line, f"{path}:{lineno}")
            if entry.sequence_no <= prev:
                raise CorruptLedger(f"{path}:{lineno}: sequence {entry.sequence_no} after {prev}")
            if entry.run_id != run_id:
                raise CorruptLedger(f"{path}:{lineno}: entry belongs to run {entry.run_id}")
            prev = entry.sequence_no
            entries.append(entry)
        return entries

    def daily_value_series(self, run_id: str) -> list[tuple[date, Decimal]]:
        return value_series(self.load_run(run_id), run_id)


def value_series(entries: Iterable[LedgerEntry], run_id: str = "") -> list[tuple[date, Decimal]]:
    """One ``(date, total_value)`` point per snapshot date; later snapshots win."""
    points: dict[date, Decimal] = {}
    for e in entries:
        if e.kind is EntryKind.SNAPSHOT:
            if e.date in points:
                log.warning("run %s has several snapshots for %s; keeping the last", run_id, e.date)
            points[e.date] = e.record.total_value
    if not points:
        raise EmptyRun(f"run {run_id!r} has no portfolio snapshots")
    return sorted(points.items())
