"""Exception hierarchy shared across the engine."""


class SessionScopeError(Exception):
    """Base class for all errors raised by this package."""


class InvalidOrientationError(SessionScopeError):
    """Quaternion input is zero-norm or too far from unit length."""


class LogParseError(SessionScopeError):
    """A log line could not be decoded. Carries a 1-based line number."""

    def __init__(self, line: int, message: str):
        super().__init__(f"line {line}: {message}")
        self.line = line
        self.reason = message


class LogStructureError(SessionScopeError):
    """Log file violates the header/body/end framing rules."""


class UnknownIdError(SessionScopeError):
    """A record or query referenced an object id that is not registered."""


class RegistrationError(SessionScopeError):
    """Object registration rejected (duplicate id, missing camera params, ...)."""


class StateError(SessionScopeError):
    """Operation called on a handle in the wrong lifecycle state."""


class CapacityError(SessionScopeError):
    """More sessions requested than the configured load limit."""


class EmptyDataError(SessionScopeError):
    """An aggregation received zero contributing samples."""


class ValidationFailedError(SessionScopeError):
    """A session log failed validation where a valid one was required."""

    def __init__(self, violations):
        self.violations = list(violations)
        lines = "; ".join(str(v) for v in self.violations[:5])
        more = f" (+{len(self.violations) - 5} more)" if len(self.violations) > 5 else ""
        super().__init__(f"session log invalid: {lines}{more}")
