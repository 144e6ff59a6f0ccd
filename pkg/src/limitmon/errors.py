class LimitmonError(Exception):
    """Base class for all errors raised by this package."""


class ValidationError(LimitmonError, ValueError):
    """Input that violates a documented precondition or file format."""


class DeterminismError(LimitmonError):
    """A counter monitor had zero or several enabled edges for one step."""

    def __init__(self, location, event, valuation, enabled):
        self.location = location
        self.event = event
        self.valuation = dict(valuation)
        self.enabled = enabled
        what = "no enabled edge" if enabled == 0 else f"{enabled} enabled edges"
        super().__init__(
            f"{what} at location {location!r} on event {event!r} "
            f"with valuation {self.valuation}"
        )


class FormulaSyntaxError(ValidationError):
    def __init__(self, message, line, column):
        self.line = line
        self.column = column
        super().__init__(f"{line}:{column}: {message}")
