"""Deterministic scripted chat provider for offline runs and tests.

Script entries (JSON Lines)::

    {"role": "Technical", "ticker": "AAPL", "date": "2025-04-10", "response": "..."}
    {"role": "Manager", "ticker": "CVX", "date": "2025-04-03", "fail_times": 2, "response": "..."}
    {"role": "Planner", "response": "{\\"analysts\\": [\\"Technical\\"]}"}

``ticker``/``date`` may be omitted (or ``"*"``) to match any value; the most
specific entry wins. ``fail_times`` makes the first N calls for the key
raise a transient error; ``"always"`` fails every call.

Unscripted keys get a default reply: ``"neutral"`` answers Neutral/Hold,
``"rules"`` reads the prompt and answers with a simple rule, so replay runs
trade. Optional per-role failure rates turn a reply into a malformed one,
drawn from a hash of ``(seed, role, ticker, date)`` so the outcome does not
depend on call order or thread scheduling.
"""

from __future__ import annotations

import hashlib
import json
import re
import threading
from dataclasses import dataclass
from datetime import date
from pathlib import Path
from typing import Iterable, Mapping

from livefund.llm.client import Completion, ModelProfile, ProviderError, RequestTag

ROLE_PLANNER = "Planner"
ROLE_MANAGER = "Manager"
DEFAULT_MODES = ("neutral", "rules")
MALFORMED_REPLY = "I am unable to give a structured answer right now."

NEUTRAL_SIGNAL = json.dumps({"signal": "Neutral", "justification": "No strong evidence in either direction."})
HOLD_DECISION = json.dumps({"action": "Hold", "shares": 0, "justification": "No clear reason to trade."})

_POSITIVE = ("surge", "beat", "rall", "pause", "gain", "record", "upgrade", "rebound", "growth", "jump", "raise", "strong")
_NEGATIVE = ("fall", "drop", "tariff", "warn", "cut", "downgrade", "slump", "retaliat", "probe", "weak", "miss", "lawsuit")


def _norm_role(role: str) -> str:
    return re.sub(r"[\s_\-]+", "", str(role)).casefold()


@dataclass(frozen=True)
class ScriptEntry:
    role: str
    ticker: str | None = None
    date: date | None = None
    response: str | None = None
    fail_times: int = 0  # -1 means always

    @classmethod
    def from_dict(cls, d: Mapping) -> "ScriptEntry":
        ticker = d.get("ticker")
        day = d.get("date")
        fails = d.get("fail_times", 0)
        if fails == "always":
            fails = -1
        response = d.get("response")
        if response is not None and not isinstance(response, str):
            response = json.dumps(response, sort_keys=True)
        return cls(
            role=str(d["role"]),
            ticker=None if ticker in (None, "*") else ticker,
            date=None if day in (None, "*") else date.fromisoformat(day),
            response=response,
            fail_times=int(fails),
        )


def load_script(path: str | Path) -> list[ScriptEntry]:
    entries = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            if line.strip():
                entries.append(ScriptEntry.from_dict(json.loads(line)))
    return entries


def _unit_draw(*parts) -> float:
    digest = hashlib.sha256("|".join(str(p) for p in parts).encode()).digest()
    return int.from_bytes(digest[:8], "big") / 2**64


class ScriptedStub:
    def __init__(
        self,
        script: Iterable[ScriptEntry] = (),
        default: str = "neutral",
        failure_rates: Mapping[str, float] | None = None,
        seed: int | str = 0,
    ):
        if default not in DEFAULT_MODES:
            raise ValueError(f"default must be one of {DEFAULT_MODES}")
        self.entries: dict[tuple, ScriptEntry] = {}
        for e in script:
            self.entries[(_norm_role(e.role), e.ticker, e.date)] = e
        self.default = default
        self.failure_rates = {_norm_role(k): float(v) for k, v in (failure_rates or {}).items()}
        self.seed = seed
        self._calls: dict[tuple, int] = {}
        self._lock = threading.Lock()

    def _lookup(self, role: str, ticker, day) -> ScriptEntry | None:
        for key in ((role, ticker, day), (role, ticker, None), (role, None, day), (role, None, None)):
            if key in self.entries:
                return self.entries[key]
        return None

    def _rate(self, role: str) -> float:
        if role in self.failure_rates:
            return self.failure_rates[role]
        if role not in (_norm_role(ROLE_MANAGER), _norm_role(ROLE_PLANNER)):
            return self.failure_rates.get("signal", 0.0)
        if role == _norm_role(ROLE_MANAGER):
            return self.failure_rates.get("decision", 0.0)
        return 0.0

    def chat(self, profile: ModelProfile, system_prompt: str, user_prompt: str, tag: RequestTag | None = None) -> Completion:
        tag = tag or RequestTag("unknown")
        role = _norm_role(tag.role)
        entry = self._lookup(role, tag.ticker, tag.date)
        if entry is not None and entry.fail_times:
            key = (role, tag.ticker, tag.date)
            with self._lock:
                n = self._calls.get(key, 0) + 1
                self._calls[key] = n
            if entry.fail_times < 0 or n <= entry.fail_times:
                raise ProviderError(f"scripted failure {n} for {tag}")
        if entry is not None and entry.response is not None:
            text = entry.response
        else:
            rate = self._rate(role)
            if rate and _unit_draw(self.seed, role, tag.ticker, tag.date) < rate:
                text = MALFORMED_REPLY
            else:
                text = self._default_reply(role, user_prompt)
        return Completion(text, len(system_prompt + user_prompt) // 4, len(text) // 4)

    def _default_reply(self, role: str, user_prompt: str) -> str:
        if role == _norm_role(ROLE_PLANNER):
            return rule_planner(user_prompt)
        if role == _norm_role(ROLE_MANAGER):
            return rule_manager(user_prompt) if self.default == "rules" else HOLD_DECISION
        if self.default == "rules":
            return rule_analyst(role, user_prompt)
        return NEUTRAL_SIGNAL


# --- rule-based replies -----------------------------------------------------


def rule_planner(user_prompt: str) -> str:
    names = re.findall(r"^- ([^:\n]+):", user_prompt, flags=re.M)
    return json.dumps({"analysts": names})


def _field(user_prompt: str, label: str) -> str | None:
    m = re.search(rf"^{re.escape(label)}:\s*(.+)$", user_prompt, flags=re.M)
    return m.group(1).strip() if m else None


def rule_manager(user_prompt: str) -> str:
    tradable = int(_field(user_prompt, "Tradable Shares") or 0)
    price = _field(user_prompt, "Current Price")
    if tradable > 0:
        reply = {"action": "Buy", "shares": tradable, "justification": f"Tradable shares are positive at {tradable}."}
    elif tradable < 0:
        reply = {
            "action": "Sell",
            "shares": -tradable,
            "justification": f"Tradable shares are negative at {tradable}; trimming toward the target ratio.",
        }
    else:
        reply = {"action": "Hold", "shares": 0, "justification": "Position is at its target ratio."}
    reply["price"] = price
    return json.dumps(reply)


def _tone(text: str) -> int:
    low = text.lower()
    return sum(low.count(w) for w in _POSITIVE) - sum(low.count(w) for w in _NEGATIVE)


def _signal(direction: str, why: str) -> str:
    return json.dumps({"signal": direction, "justification": why})


def rule_analyst(role: str, user_prompt: str) -> str:
    if role == "technical":
        trend = _field(user_prompt, "Price Trend Analysis") or ""
        rsi_text = _field(user_prompt, "RSI") or ""
        m = re.match(r"([\d.]+)", rsi_text)
        rsi = float(m.group(1)) if m else 50.0
        if rsi >= 70:
            return _signal("Bearish", f"RSI {rsi:.1f} is overbought.")
        if rsi <= 30:
            return _signal("Bullish", f"RSI {rsi:.1f} is oversold.")
        if trend.startswith("Uptrend"):
            return _signal("Bullish", f"Short-term average above long-term: {trend}.")
        if trend.startswith("Downtrend"):
            return _signal("Bearish", f"Short-term average below long-term: {trend}.")
        return _signal("Neutral", "No directional trend in the indicators.")
    if role == "insider":
        buys = user_prompt.count(": bought ")
        sells = user_prompt.count(": sold ")
        if buys > sells:
            return _signal("Bullish", f"Insiders bought {buys} times versus {sells} sales.")
        if sells > buys:
            return _signal("Bearish", f"Insiders sold {sells} times versus {buys} purchases.")
        return _signal("Neutral", "Insider activity is balanced or absent.")
    score = _tone(user_prompt.split("You must provide")[0])
    if score > 0:
        return _signal("Bullish", "News flow leans positive.")
    if score < 0:
        return _signal("Bearish", "News flow leans negative.")
    return _signal("Neutral", "News flow is mixed.")
