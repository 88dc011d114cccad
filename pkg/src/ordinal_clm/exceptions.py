"""Exception hierarchy shared by every module in the package."""


class OrdinalError(Exception):
    """Base class for all errors raised by ``ordinal_clm``."""


class DomainError(OrdinalError, ValueError):
    """An argument lies outside the domain of the operation."""


class UndefinedMetricError(OrdinalError, ArithmeticError):
    """A kappa-style ratio has a zero denominator (0/0)."""


class DivergenceError(OrdinalError, FloatingPointError):
    """A loss or gradient became non-finite during training.

    ``index`` is the flat parameter index of the first offending entry,
    or ``None`` when the loss itself was non-finite.
    """

    def __init__(self, message, index=None):
        super().__init__(message)
        self.index = index


class GenerationError(OrdinalError):
    """Synthetic data generation produced an empty class."""


class ParseError(OrdinalError, ValueError):
    """A data file could not be parsed; ``line`` is 1-based."""

    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class ConfigError(OrdinalError, ValueError):
    """Invalid training or grid configuration."""


class UnsupportedRuleError(OrdinalError, ValueError):
    """Decision rule not available for this kind of model."""
