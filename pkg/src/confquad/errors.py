"""Exception types raised across the package."""


class ParameterError(ValueError):
    """An argument is outside the admissible range of an operation."""


class RangeError(ParameterError):
    """Parameters lie outside the range where a stated inequality is claimed."""


class ConstructionError(ValueError):
    """A test function cannot be built consistently from its ingredients."""


class BudgetError(RuntimeError):
    """An estimate would exceed the configured evaluation budget."""


class UnsupportedDimensionError(ValueError):
    """The estimator is not defined for the dimension of the integrand."""
