"""Exception hierarchy shared by every module of the package."""


class SiedError(Exception):
    """Base class for all errors raised by :mod:`sied`."""


class PrimeGenerationFailure(SiedError):
    pass


class NonDivisibleInput(SiedError, ValueError):
    pass


class PlaintextOutOfRange(SiedError, ValueError):
    pass


class BadRandomness(SiedError, ValueError):
    pass


class MalformedCiphertext(SiedError, ValueError):
    pass


class RetryLimitExceeded(SiedError):
    """Rejection sampling gave up; ``index`` names the failing symbol if known."""

    def __init__(self, message, index=None):
        super().__init__(message)
        self.index = index


class LengthMismatch(SiedError, ValueError):
    pass


class PayloadCorruption(SiedError, ValueError):
    pass


class NotExpandable(SiedError, ValueError):
    pass


class CapacityExceeded(SiedError):
    pass


class KeyRoleMismatch(SiedError):
    pass


class MissingTrace(SiedError):
    pass


class BinningMismatch(SiedError, ValueError):
    pass


class InsufficientSamples(SiedError, ValueError):
    pass


class EmptySample(SiedError, ValueError):
    pass


class FormatError(SiedError, ValueError):
    """A serialized record could not be parsed."""


class StageFailure(SiedError):
    """A scenario stage failed; ``stage`` names it and ``__cause__`` holds the error."""

    def __init__(self, stage, message):
        super().__init__(f"{stage}: {message}")
        self.stage = stage
