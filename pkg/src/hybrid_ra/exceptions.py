class HybridRAError(ValueError):
    """Base class for errors raised by hybrid_ra."""


class InvalidConfigError(HybridRAError):
    """A configuration value is out of its allowed range.

    ``field`` names the offending parameter when it is known.
    """

    def __init__(self, message, field=None):
        super().__init__(message)
        self.field = field


class InvalidInputError(HybridRAError):
    """An argument passed to an operation violates its precondition."""
