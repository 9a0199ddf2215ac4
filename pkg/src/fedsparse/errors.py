"""Exception types shared across the package."""


class ConfigurationError(ValueError):
    """Invalid configuration: bad dimensions, non-positive costs, out-of-range budgets."""


class VerificationError(AssertionError):
    """A verification-suite check failed."""
