"""Parsers for structured model replies.

Replies are read as a JSON object first (bare, fenced, or embedded in
prose); failing that, as ``label: value`` lines. A parser either returns
fields that satisfy the domain invariants or raises a ``Malformed*`` error.
"""

from __future__ import annotations

import json
import logging
import re
from dataclasses import dataclass
from decimal import Decimal, InvalidOperation
from typing import Any, Sequence

from livefund.domain import AnalystKind, DecisionAction, SignalDirection, parse_action, parse_direction
from livefund.errors import (
    MalformedDecisionResponse,
    MalformedPlannerResponse,
    MalformedSignalResponse,
    UnrecognizedAction,
    UnrecognizedDirection,
)

log = logging.getLogger(__name__)

_LABEL_RE = re.compile(r"^[\s>*\-#]*\**\s*([A-Za-z_ ]+?)\s*\**\s*[:=]\s*\**\s*(.*)$")


def _find_json(text: str) -> Any | None:
    """Return the first JSON object or array embedded in ``text``."""
    decoder = json.JSONDecoder()
    for i, ch in enumerate(text):
        if ch in "{[":
            try:
                value, _ = decoder.raw_decode(text, i)
            except ValueError:
                continue
            return value
    return None


def _lower_keys(obj: dict) -> dict:
    return {str(k).strip().lower(): v for k, v in obj.items()}


def _labeled(text: str, labels: Sequence[str]) -> dict[str, str]:
    """Collect ``label: value`` lines; unlabeled lines continue the previous field."""
    found: dict[str, list[str]] = {}
    current = None
    for line in text.splitlines():
        m = _LABEL_RE.match(line)
        key = m.group(1).strip().lower() if m else None
        if key in labels:
            current = key
            found.setdefault(key, []).append(m.group(2).strip().strip("*").strip())
        elif current is not None and line.strip():
            found[current].append(line.strip())
    return {k: " ".join(p for p in v if p).strip() for k, v in found.items()}


def _clean(value: Any) -> str:
    return str(value).strip().strip('"').strip("'").strip()


def parse_signal_response(text: str) -> tuple[SignalDirection, str]:
    obj = _find_json(text or "")
    if isinstance(obj, dict):
        fields = _lower_keys(obj)
    else:
        fields = _labeled(text or "", ("signal", "justification"))
    if "signal" not in fields or "justification" not in fields:
        raise MalformedSignalResponse("reply lacks signal/justification fields")
    try:
        direction = parse_direction(_clean(fields["signal"]))
    except UnrecognizedDirection as exc:
        raise MalformedSignalResponse(str(exc)) from exc
    justification = str(fields["justification"] or "").strip()
    if not justification:
        raise MalformedSignalResponse("empty justification")
    return direction, justification


@dataclass(frozen=True)
class ParsedDecision:
    action: DecisionAction
    shares: int
    price: Decimal | None
    justification: str
    normalized: bool = False

    def __iter__(self):
        return iter((self.action, self.shares, self.price, self.justification))


def _as_shares(value: Any) -> int:
    if isinstance(value, bool):
        raise MalformedDecisionResponse("shares is not a number")
    try:
        num = Decimal(_clean(value).replace(",", ""))
    except (InvalidOperation, ValueError) as exc:
        raise MalformedDecisionResponse(f"shares is not a number: {value!r}") from exc
    if num != num.to_integral_value():
        raise MalformedDecisionResponse(f"fractional shares: {value!r}")
    return int(num)


def _as_price(value: Any) -> Decimal | None:
    if value is None:
        return None
    try:
        num = Decimal(_clean(value).lstrip("$").replace(",", ""))
    except (InvalidOperation, ValueError):
        return None
    return num if num.is_finite() and num > 0 else None


def parse_decision_response(text: str) -> ParsedDecision:
    """Read action/shares/price/justification.

    A Hold carrying shares is normalized to 0 shares (``normalized=True``);
    a Buy or Sell with no positive share count is malformed. A missing or
    unreadable price is returned as ``None``: the engine prices trades itself.
    """
    obj = _find_json(text or "")
    if isinstance(obj, dict):
        fields = _lower_keys(obj)
    else:
        fields = _labeled(text or "", ("action", "shares", "price", "justification"))
    if "action" not in fields or "justification" not in fields:
        raise MalformedDecisionResponse("reply lacks action/justification fields")
    try:
        action = parse_action(_clean(fields["action"]))
    except UnrecognizedAction as exc:
        raise MalformedDecisionResponse(str(exc)) from exc
    justification = str(fields["justification"] or "").strip()
    if not justification:
        raise MalformedDecisionResponse("empty justification")
    raw_shares = fields.get("shares")
    if raw_shares is None or raw_shares == "":
        if action is not DecisionAction.HOLD:
            raise MalformedDecisionResponse(f"{action.value} without a share count")
        shares = 0
    else:
        shares = _as_shares(raw_shares)
    normalized = False
    if action is DecisionAction.HOLD and shares != 0:
        log.warning("Hold reply carried %s shares; normalized to 0", shares)
        shares, normalized = 0, True
    if action is not DecisionAction.HOLD and shares <= 0:
        raise MalformedDecisionResponse(f"{action.value} with non-positive shares {shares}")
    return ParsedDecision(action, shares, _as_price(fields.get("price")), justification, normalized)


def parse_planner_response(text: str, available: Sequence[AnalystKind]) -> list[AnalystKind]:
    obj = _find_json(text or "")
    if isinstance(obj, dict):
        obj = _lower_keys(obj).get("analysts")
    if not isinstance(obj, list):
        raise MalformedPlannerResponse("planner reply holds no analyst list")
    allowed = set(available)
    chosen: list[AnalystKind] = []
    for name in obj:
        try:
            kind = AnalystKind.parse(str(name))
        except ValueError:
            log.warning("planner named unknown analyst %r", name)
            continue
        if kind in allowed and kind not in chosen:
            chosen.append(kind)
    if not chosen:
        raise MalformedPlannerResponse("planner selected no available analyst")
    return chosen
