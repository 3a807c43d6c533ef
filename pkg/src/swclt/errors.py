class SwcltError(Exception):
    """Base class for errors raised by swclt."""


class DomainError(SwcltError, ValueError):
    """An argument lies outside the domain of the operation."""


class IncompatibleInputError(SwcltError, ValueError):
    """Inputs have mismatched dimensions."""


class UnsupportedConfigurationError(SwcltError, ValueError):
    """The inputs are valid but the operation does not handle this case."""


class NumericalError(SwcltError, ArithmeticError):
    """An iterative computation failed to produce a finite result."""

    def __init__(self, message, trace=None):
        super().__init__(message)
        self.trace = trace


class ConfigError(SwcltError, ValueError):
    """Invalid experiment configuration."""
