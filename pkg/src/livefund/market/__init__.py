"""Market data models, providers, and the leakage-guarded gateway."""

from livefund.market.gateway import (
    DEFAULT_INSIDER_COUNT,
    DEFAULT_MACRO_COUNT,
    DEFAULT_NEWS_COUNT,
    DEFAULT_OHLCV_WINDOW,
    MarketGateway,
    register_provider,
)
from livefund.market.models import (
    ClockMode,
    FundamentalsSnapshot,
    InsiderKind,
    InsiderTransaction,
    MacroIndicator,
    NewsItem,
    NewsScope,
    OHLCVBar,
    SimulationClock,
)
from livefund.market.replay import ReplayProvider, validate_fixture_dir

__all__ = [
    "ClockMode",
    "DEFAULT_INSIDER_COUNT",
    "DEFAULT_MACRO_COUNT",
    "DEFAULT_NEWS_COUNT",
    "DEFAULT_OHLCV_WINDOW",
    "FundamentalsSnapshot",
    "InsiderKind",
    "InsiderTransaction",
    "MacroIndicator",
    "MarketGateway",
    "NewsItem",
    "NewsScope",
    "OHLCVBar",
    "ReplayProvider",
    "SimulationClock",
    "register_provider",
    "validate_fixture_dir",
]
