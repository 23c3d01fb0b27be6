"""Indicator checks against independent closed-form or brute-force oracles."""

import math
from datetime import date, timedelta
from decimal import Decimal

import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from livefund.errors import InsufficientHistory, ZeroAverageVolume
from livefund.indicators import (
    INSUFFICIENT,
    compute_mean_reversion,
    compute_price_levels,
    compute_rsi,
    compute_trend,
    compute_volatility,
    compute_volume_ratio,
    summarize,
)
from livefund.market import OHLCVBar

prices = st.lists(st.floats(min_value=1.0, max_value=1000.0, allow_nan=False), min_size=15, max_size=120)


def wilder_oracle(closes, period=14):
    """Closed form of Wilder smoothing: a weighted sum instead of a recursion.

    After the seed average over the first ``period`` moves, each later move
    enters with weight 1/period and decays by (period-1)/period per step.
    """
    moves = [b - a for a, b in zip(closes, closes[1:])]
    k = len(moves) - period
    decay = (period - 1) / period

    def smoothed(xs):
        seed = sum(xs[:period]) / period
        tail = sum(x / period * decay ** (k - 1 - i) for i, x in enumerate(xs[period:]))
        return seed * decay**k + tail

    g = smoothed([max(m, 0.0) for m in moves])
    l = smoothed([max(-m, 0.0) for m in moves])
    if g == 0 and l == 0:
        return 50.0
    if l == 0:
        return 100.0
    return 100 - 100 / (1 + g / l)


def bars_from(closes, volumes=None):
    start = date(2025, 1, 1)
    out = []
    for i, c in enumerate(closes):
        c = Decimal(repr(c))
        out.append(OHLCVBar(start + timedelta(days=i), c, c * Decimal("1.01"), c * Decimal("0.99"), c,
                            volumes[i] if volumes else 1000 + i))
    return out


class TestRsi:
    @given(prices)
    @settings(max_examples=200)
    def test_matches_closed_form(self, closes):
        assert compute_rsi(closes) == pytest.approx(wilder_oracle(closes), abs=1e-7)

    @given(prices)
    def test_bounded(self, closes):
        assert 0.0 <= compute_rsi(closes) <= 100.0

    def test_monotone_up_is_100(self):
        assert compute_rsi(list(range(1, 30))) == 100.0

    def test_monotone_down_is_0(self):
        assert compute_rsi(list(range(30, 1, -1))) == 0.0

    def test_flat_is_50(self):
        assert compute_rsi([10.0] * 20) == 50.0

    def test_needs_period_plus_one(self):
        with pytest.raises(InsufficientHistory):
            compute_rsi([1.0] * 14)


class TestTrend:
    def test_uptrend_from_sma_oracle(self):
        closes = [100 + i for i in range(60)]
        t = compute_trend(closes)
        assert t.short_sma == pytest.approx(sum(closes[-10:]) / 10)
        assert t.long_sma == pytest.approx(sum(closes[-50:]) / 50)
        assert t.label == "Uptrend"

    def test_flat_within_epsilon(self):
        assert compute_trend([100.0] * 50).label == "Flat"

    def test_downtrend(self):
        assert compute_trend([200 - i for i in range(60)]).label == "Downtrend"

    @given(prices.filter(lambda p: len(p) >= 50), st.floats(min_value=0.1, max_value=10))
    def test_scale_invariant(self, closes, k):
        base = compute_trend(closes)
        short, long = base.short_sma, base.long_sma
        # stay clear of the epsilon boundary, where rounding could flip the label
        assume(abs(short / long - 1.001) > 1e-6 and abs(short / long - 0.999) > 1e-6)
        assert compute_trend([c * k for c in closes]).label == base.label


class TestOtherReadings:
    @given(prices.filter(lambda p: len(p) >= 20))
    def test_mean_reversion_oracle(self, closes):
        w = closes[-20:]
        mean = sum(w) / 20
        sd = math.sqrt(sum((x - mean) ** 2 for x in w) / 19)
        z = compute_mean_reversion(closes)
        if sd > 1e-9 * mean:
            assert z == pytest.approx((w[-1] - mean) / sd, rel=1e-6, abs=1e-6)

    def test_constant_mean_reversion_zero(self):
        assert compute_mean_reversion([5.0] * 20) == 0.0

    @given(prices.filter(lambda p: len(p) >= 21))
    def test_volatility_oracle(self, closes):
        rets = [math.log(b / a) for a, b in zip(closes[-21:], closes[-20:])]
        m = sum(rets) / 20
        sd = math.sqrt(sum((r - m) ** 2 for r in rets) / 19)
        assert compute_volatility(closes) == pytest.approx(sd * math.sqrt(252), rel=1e-6, abs=1e-9)

    def test_volatility_window_one(self):
        with pytest.raises(InsufficientHistory):
            compute_volatility([1.0, 2.0], window=1)

    def test_volume_ratio_excludes_latest(self):
        assert compute_volume_ratio([100] * 20 + [250]) == 2.5

    def test_volume_ratio_zero(self):
        with pytest.raises(ZeroAverageVolume):
            compute_volume_ratio([0] * 20 + [5])

    def test_price_levels(self):
        bars = bars_from([10.0, 12.0, 11.0])
        assert compute_price_levels(bars, 3) == (bars[0].low, bars[1].high)


class TestSummary:
    def test_short_history_degrades(self):
        s = summarize(bars_from([10.0 + i for i in range(12)]))
        f = s.fragments()
        assert f["trend"] == INSUFFICIENT and f["rsi"] == INSUFFICIENT
        assert f["price_levels"] != INSUFFICIENT and s.levels_window == 12

    def test_full_history_has_six_readings(self):
        s = summarize(bars_from([100 + math.sin(i / 3) * 5 for i in range(100)]))
        assert all(v != INSUFFICIENT for v in s.fragments().values())
        assert s.fragments()["rsi"].split()[0].count(".") == 1
