"""Technical summaries that fill the technical analyst's prompt.

Conventions: Wilder RSI(14), SMA 10/50 crossover trend, 20-bar z-score,
20-bar annualized log-return volatility, volume ratio against the 20 bars
before the latest one, and 20-bar low/high extrema for support/resistance.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from decimal import Decimal
from typing import Sequence

import numpy as np

from livefund.errors import InsufficientHistory, ZeroAverageVolume

TRADING_DAYS = 252
TREND_EPSILON = 0.001
INSUFFICIENT = "insufficient history"


def _floats(values) -> np.ndarray:
    return np.asarray([float(v) for v in values], dtype=float)


def compute_rsi(closes: Sequence, period: int = 14) -> float:
    """Wilder-smoothed relative strength index in [0, 100].

    A series with neither gains nor losses reads 50.
    """
    if period < 1:
        raise ValueError("period must be positive")
    if len(closes) < period + 1:
        raise InsufficientHistory(f"RSI({period}) needs {period + 1} closes, got {len(closes)}")
    diffs = np.diff(_floats(closes))
    gains = np.clip(diffs, 0.0, None)
    losses = np.clip(-diffs, 0.0, None)
    avg_gain = gains[:period].mean()
    avg_loss = losses[:period].mean()
    for g, l in zip(gains[period:], losses[period:]):
        avg_gain = (avg_gain * (period - 1) + g) / period
        avg_loss = (avg_loss * (period - 1) + l) / period
    if avg_loss == 0 and avg_gain == 0:
        return 50.0
    if avg_loss == 0:
        return 100.0
    if avg_gain == 0:
        return 0.0
    rsi = 100.0 - 100.0 / (1.0 + avg_gain / avg_loss)
    return min(100.0, max(0.0, rsi))


@dataclass(frozen=True)
class TrendReading:
    label: str
    short_sma: float
    long_sma: float
    short_window: int
    long_window: int

    def render(self) -> str:
        return (
            f"{self.label} ({self.short_window}-day SMA {self.short_sma:.2f} "
            f"vs {self.long_window}-day SMA {self.long_sma:.2f})"
        )


def compute_trend(closes: Sequence, short_window: int = 10, long_window: int = 50) -> TrendReading:
    if not 0 < short_window < long_window:
        raise ValueError("need 0 < short_window < long_window")
    if len(closes) < long_window:
        raise InsufficientHistory(f"trend needs {long_window} closes, got {len(closes)}")
    arr = _floats(closes)
    short = arr[-short_window:].mean()
    long = arr[-long_window:].mean()
    if short > long * (1 + TREND_EPSILON):
        label = "Uptrend"
    elif short < long * (1 - TREND_EPSILON):
        label = "Downtrend"
    else:
        label = "Flat"
    return TrendReading(label, float(short), float(long), short_window, long_window)


def compute_mean_reversion(closes: Sequence, window: int = 20) -> float:
    """z-score of the last close against the trailing window (sample std)."""
    if window < 2:
        raise ValueError("mean-reversion window must be at least 2")
    if len(closes) < window:
        raise InsufficientHistory(f"mean reversion needs {window} closes, got {len(closes)}")
    arr = _floats(closes)[-window:]
    if np.ptp(arr) == 0:
        return 0.0
    std = arr.std(ddof=1)
    return float((arr[-1] - arr.mean()) / std)


def compute_volatility(closes: Sequence, window: int = 20) -> float:
    if window < 2:
        raise InsufficientHistory("sample volatility needs at least two returns")
    if len(closes) < window + 1:
        raise InsufficientHistory(f"volatility needs {window + 1} closes, got {len(closes)}")
    arr = _floats(closes)[-(window + 1):]
    rets = np.diff(np.log(arr))
    if np.ptp(rets) == 0:
        return 0.0
    return float(rets.std(ddof=1) * math.sqrt(TRADING_DAYS))


def compute_volume_ratio(volumes: Sequence, window: int = 20) -> float:
    """Latest volume over the mean of the ``window`` volumes before it."""
    if window < 1:
        raise ValueError("window must be positive")
    if len(volumes) < window + 1:
        raise InsufficientHistory(f"volume ratio needs {window + 1} bars, got {len(volumes)}")
    arr = _floats(volumes)
    avg = arr[-(window + 1):-1].mean()
    if avg <= 0:
        raise ZeroAverageVolume("average volume over the window is zero")
    return float(arr[-1] / avg)


def compute_price_levels(bars: Sequence, window: int = 20) -> tuple[Decimal, Decimal]:
    if window < 1:
        raise ValueError("window must be positive")
    if len(bars) < window:
        raise InsufficientHistory(f"price levels need {window} bars, got {len(bars)}")
    recent = bars[-window:]
    return min(b.low for b in recent), max(b.high for b in recent)


@dataclass(frozen=True)
class IndicatorParams:
    rsi_period: int = 14
    short_window: int = 10
    long_window: int = 50
    mean_window: int = 20
    volatility_window: int = 20
    volume_window: int = 20
    levels_window: int = 20


@dataclass(frozen=True)
class TechnicalSummary:
    """Six technical readings; ``None`` marks a reading without enough history."""

    trend: TrendReading | None
    mean_reversion: float | None
    rsi: float | None
    volatility: float | None
    volume: float | None
    support: Decimal | None
    resistance: Decimal | None
    last_close: Decimal | None = None
    mean_window: int = 20
    rsi_period: int = 14
    volatility_window: int = 20
    volume_window: int = 20
    levels_window: int = 20

    def __post_init__(self):
        if self.rsi is not None and not 0 <= self.rsi <= 100:
            raise ValueError("RSI outside [0, 100]")
        if self.volatility is not None and self.volatility < 0:
            raise ValueError("volatility cannot be negative")
        if self.support is not None and self.support > self.resistance:
            raise ValueError("support above resistance")

    def fragments(self) -> dict[str, str]:
        """Prompt fragments keyed by template placeholder name."""
        f = {}
        f["trend"] = self.trend.render() if self.trend else INSUFFICIENT
        if self.mean_reversion is None:
            f["mean_reversion"] = INSUFFICIENT
        else:
            z = self.mean_reversion
            side = "above" if z > 0 else "below" if z < 0 else "at"
            f["mean_reversion"] = f"z-score {z:.2f} ({side} the {self.mean_window}-day mean)"
        f["rsi"] = INSUFFICIENT if self.rsi is None else f"{self.rsi:.1f} ({self.rsi_period}-day)"
        f["volatility"] = (
            INSUFFICIENT
            if self.volatility is None
            else f"{self.volatility * 100:.2f}% annualized over {self.volatility_window} days"
        )
        f["volume"] = (
            INSUFFICIENT
            if self.volume is None
            else f"latest volume {self.volume:.2f}x the prior {self.volume_window}-day average"
        )
        if self.support is None:
            f["price_levels"] = INSUFFICIENT
        else:
            f["price_levels"] = (
                f"support {float(self.support):.2f}, resistance {float(self.resistance):.2f} "
                f"({self.levels_window}-day range)"
            )
        return f


def _attempt(fn, *args):
    try:
        return fn(*args)
    except (InsufficientHistory, ZeroAverageVolume):
        return None


def summarize(bars: Sequence, params: IndicatorParams = IndicatorParams()) -> TechnicalSummary:
    """Compute all six readings, degrading per-reading when history is short."""
    closes = [b.close for b in bars]
    volumes = [b.volume for b in bars]
    levels_window = min(params.levels_window, len(bars))
    levels = _attempt(compute_price_levels, bars, levels_window) if bars else None
    return TechnicalSummary(
        trend=_attempt(compute_trend, closes, params.short_window, params.long_window),
        mean_reversion=_attempt(compute_mean_reversion, closes, params.mean_window),
        rsi=_attempt(compute_rsi, closes, params.rsi_period),
        volatility=_attempt(compute_volatility, closes, params.volatility_window),
        volume=_attempt(compute_volume_ratio, volumes, params.volume_window),
        support=levels[0] if levels else None,
        resistance=levels[1] if levels else None,
        last_close=closes[-1] if closes else None,
        mean_window=params.mean_window,
        rsi_period=params.rsi_period,
        volatility_window=params.volatility_window,
        volume_window=params.volume_window,
        levels_window=levels_window,
    )
