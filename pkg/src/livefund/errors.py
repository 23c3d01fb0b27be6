"""Exception hierarchy shared by every livefund module.

Each fatal class carries an ``exit_code`` so the command line can map
failures onto stable process exit statuses.
"""

from __future__ import annotations


class LivefundError(Exception):
    """Base class for all library errors."""

    exit_code = 1


# domain parsing


class UnrecognizedDirection(LivefundError, ValueError):
    pass


class UnrecognizedAction(LivefundError, ValueError):
    pass


# configuration


class ConfigError(LivefundError):
    exit_code = 2


# market data


class LeakageViolation(LivefundError):
    """A provider served a record dated after the simulation clock."""

    exit_code = 3


class ProviderUnavailable(LivefundError):
    exit_code = 8


class UnknownTicker(LivefundError):
    exit_code = 8


class NoPriceAvailable(LivefundError):
    exit_code = 8


class UnknownProviderKind(LivefundError):
    exit_code = 2


class MissingCredential(LivefundError):
    exit_code = 5


class ClockError(LivefundError, ValueError):
    pass


# indicators


class InsufficientHistory(LivefundError, ValueError):
    pass


class ZeroAverageVolume(LivefundError, ValueError):
    pass


# llm


class LlmUnavailable(LivefundError):
    pass


class PayloadMismatch(LivefundError, TypeError):
    pass


class MalformedResponse(LivefundError, ValueError):
    pass


class MalformedSignalResponse(MalformedResponse):
    pass


class MalformedDecisionResponse(MalformedResponse):
    pass


class MalformedPlannerResponse(MalformedResponse):
    pass


# execution / ledger


class InfeasibleExecution(LivefundError):
    pass


class UnknownRun(LivefundError):
    exit_code = 6


class EmptyRun(LivefundError):
    exit_code = 6


class StorageFailure(LivefundError):
    exit_code = 4


class CorruptLedger(LivefundError):
    exit_code = 4


class MissingPrice(LivefundError, KeyError):
    pass


# metrics


class InsufficientData(LivefundError, ValueError):
    pass


class ZeroVariance(LivefundError, ValueError):
    pass


class ZeroMarketVariance(ZeroVariance):
    pass


class MisalignedSeries(LivefundError, ValueError):
    pass


class MissingNextPrice(LivefundError, KeyError):
    pass


class FixtureValidationError(LivefundError):
    exit_code = 7
