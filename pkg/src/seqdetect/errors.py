"""Exception and warning types shared across the package."""


class SeqDetectError(Exception):
    """Base class for all package-specific errors."""


class DegenerateModel(SeqDetectError):
    """A stream model whose KL divergences are zero or non-finite."""


class SampledInactiveStream(SeqDetectError):
    """An increment was applied to a stream that already reached a decision.

    This always indicates a bug in a sampling procedure, never a data issue.
    """


class HorizonExceeded(SeqDetectError):
    """A stream consumed more samples than the configured hard cap.

    Termination is almost sure for any valid model, so hitting the cap
    means either the cap is unrealistically small or the model is broken.
    """


class DomainError(SeqDetectError, ValueError):
    """An argument fell outside the mathematical domain of an operation."""


class ConfigError(SeqDetectError, ValueError):
    """An experiment configuration violates the documented schema."""


class InsufficientTrials(UserWarning):
    """Error-rate estimate requested with too few trials to resolve it."""
