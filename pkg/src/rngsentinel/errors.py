"""Exception types shared across the engine."""


class SentinelError(Exception):
    """Base class for all engine errors."""


class OsEntropyUnavailable(SentinelError):
    """The OS entropy device could not be read. There is no silent fallback."""


class InsecureSeed(SentinelError):
    """A CSPRNG was asked to key itself from anything but OS entropy."""


class InvalidRange(SentinelError, ValueError):
    """Interval bounds with a >= b."""


class InvalidScale(SentinelError, ValueError):
    """Scale parameter that must be positive is not."""


class DomainError(SentinelError, ValueError):
    """Input outside a transform's mathematical domain."""


class EmptySample(SentinelError, ValueError):
    """A statistical test received zero samples."""


class SampleTooSmall(SentinelError, ValueError):
    """Sample size below the test's validity floor."""


class NonFiniteSample(SentinelError, ValueError):
    """NaN or infinity in a sample batch."""


class BinTooSparse(SentinelError, ValueError):
    """Chi-square bin with expected count below 5, or fewer than 2 bins."""


class CountMismatch(SentinelError, ValueError):
    """Observed and expected chi-square inputs disagree in shape or total."""


class MalformedManifest(SentinelError, ValueError):
    """Randomness manifest violates its structural invariants."""


class InvalidConfig(SentinelError, ValueError):
    """Auditor configuration violates its invariants."""


class AuditorStopped(SentinelError):
    """Event submitted to an auditor that is not running."""


class UnknownSlot(SentinelError, KeyError):
    """Generator slot name not present in the auditor registry."""


class DrainTimeout(SentinelError, TimeoutError):
    """drain_reports timed out before the auditor went quiescent."""


class InvalidWindow(SentinelError, ValueError):
    """Time-window attack parameters out of range."""


class SpecMismatch(SentinelError, ValueError):
    """Noise regeneration asked for a distribution it cannot reproduce."""
