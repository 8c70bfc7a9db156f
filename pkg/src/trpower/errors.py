"""Exception types shared across the package."""


class DegenerateChannelError(ValueError):
    """Raised when a normalization needs a channel with nonzero energy."""


class NumericalError(ArithmeticError):
    """Raised when an iterative numerical routine fails to converge."""


class InsufficientSamplesError(ValueError):
    """Raised when a tail probability is too small for the sample count."""


class SampleBudgetError(RuntimeError):
    """Raised when an ensemble would exceed the materialized sample budget."""
