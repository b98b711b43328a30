"""Exception types shared across the package."""


class DomainError(ValueError):
    """An input lies outside the domain of a mathematical operation."""


class ConditionError(DomainError):
    """A matrix that must be inverted is singular or too ill-conditioned."""


class ScheduleError(ValueError):
    """A reward schedule or arm-set file failed validation.

    ``row`` is the 1-based line number in the source text, when known.
    """

    def __init__(self, message, row=None):
        self.row = row
        if row is not None:
            message = f"row {row}: {message}"
        super().__init__(message)


class ConfigError(ValueError):
    """An experiment configuration is malformed or violates an invariant."""

    def __init__(self, message, field=None):
        self.field = field
        super().__init__(message)
