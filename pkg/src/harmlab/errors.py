"""Exception types shared across the package."""


class HarmlabError(Exception):
    """Base class for all package errors."""


class DomainError(HarmlabError, ValueError):
    """A parameter lies outside the domain where the operation is defined."""


class GridMismatchError(HarmlabError, ValueError):
    """Two grid functions live on different grids."""


class IntervalRangeError(HarmlabError, IndexError):
    """An interval does not fit inside the grid."""


class StructureError(HarmlabError, ValueError):
    """The grid lacks the dyadic structure an operation needs."""


class KernelError(HarmlabError, ValueError):
    """A kernel violated its declared size or regularity bound."""

    def __init__(self, message, sample=None):
        super().__init__(message)
        self.sample = sample


class LevelTooLowError(HarmlabError, ValueError):
    """Calderon-Zygmund level below the average of |f| over the whole grid."""


class InsufficientDataError(HarmlabError, ValueError):
    """Too few sweep points to fit a growth exponent."""


class UnknownSpecError(HarmlabError, KeyError):
    """No inequality is registered under the requested id."""
