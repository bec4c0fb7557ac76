"""Exception types shared across the package."""


class PrimeHitError(Exception):
    """Base class for all errors raised by primehit."""


class PreconditionError(PrimeHitError, ValueError):
    """An argument violates an operation's documented precondition."""


class SizingError(PreconditionError):
    """A prime table is too small for the requested computation."""

    def __init__(self, message: str, required_limit: int):
        super().__init__(f"{message} (required prime table limit >= {required_limit})")
        self.required_limit = required_limit


class ResourceLimitError(PrimeHitError, MemoryError):
    """A request would exceed the configured memory budget."""


class CertificationUnavailable(PrimeHitError):
    """Tail certification cannot be produced for this configuration."""


class TailCertificationError(PrimeHitError):
    """The tail-bound construction failed to certify convergence."""


class CapOverflowError(PrimeHitError):
    """A simulation episode exceeded the roll cap."""
