"""Exception hierarchy shared by all rigdeg modules."""


class RigdegError(Exception):
    """Base class for every error raised by rigdeg."""


class ParameterError(RigdegError, ValueError):
    """A distribution spec or argument has parameters outside their valid range."""


class DomainError(RigdegError, ValueError):
    """A numerical operation is undefined for its input (e.g. a divergent moment)."""


class TruncationError(DomainError):
    """The requested tail tolerance cannot be met within the support budget."""

    def __init__(self, message: str, achieved: float | None = None):
        super().__init__(message)
        self.achieved = achieved


class ConfigError(RigdegError, ValueError):
    """A model or experiment configuration violates its invariants."""


class InvariantViolation(RigdegError, AssertionError):
    """A pathwise invariant failed. This always indicates an implementation bug."""

    def __init__(self, message: str, diagnostics: dict | None = None):
        super().__init__(message)
        self.diagnostics = diagnostics or {}
