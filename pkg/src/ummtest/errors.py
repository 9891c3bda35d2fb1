"""Exception types shared across the package."""


class UmmtestError(Exception):
    """Base class for all errors raised by this package."""


class DomainError(UmmtestError, ValueError):
    """An argument lies outside the mathematical domain of an operation."""


class RangeError(UmmtestError, ValueError):
    """A target value lies outside the range of an invertible function."""


class SingularityError(UmmtestError, ValueError):
    """A matrix required to be positive definite is (numerically) singular."""


class StabilityError(UmmtestError, ValueError):
    """An autoregression is not stable (roots inside the unit circle)."""


class ConfigError(UmmtestError, ValueError):
    """An invalid or inconsistent run configuration."""
