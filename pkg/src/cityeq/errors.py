"""Exception types shared across the package."""


class CityEqError(ValueError):
    """Base class for all validation errors raised by this package."""


class InvalidDomainError(CityEqError):
    """Degenerate or malformed spatial domain (e.g. lo >= hi)."""


class InvalidResolutionError(CityEqError):
    """Grid resolution below the minimum of 2 nodes per axis."""


class NumericInputError(CityEqError):
    """Non-finite or out-of-range numeric input."""


class InvalidWageError(CityEqError):
    """Wage outside (0, +inf); demand and profit are unbounded there."""


class InvalidPreferenceError(CityEqError):
    """Preference exponent theta outside [0, 1)."""


class ConfigError(CityEqError):
    """Scenario configuration failed parsing or validation.

    ``field`` holds a dotted path into the JSON document when known.
    """

    def __init__(self, message, field=None):
        self.field = field
        if field:
            message = f"{field}: {message}"
        super().__init__(message)
