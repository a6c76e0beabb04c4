"""Exception hierarchy shared by the library and the CLI exit-code mapping."""


class ConeCritError(Exception):
    """Base class for all library errors."""


class DomainError(ConeCritError, ValueError):
    """Invalid input data (bad domain, negative eigenvalue, c <= 0, ...)."""


class UnsupportedShapeError(DomainError):
    """The cross-section has no grid representation for the requested operation."""


class RegimeError(ConeCritError):
    """Parameters fall outside the regime an operation is valid for."""


class CoercivityError(RegimeError):
    """The shifted angular operator is not coercive (mu >= lambda1)."""


class NumericalFailure(ConeCritError):
    """An iteration or integration did not deliver the requested accuracy."""


class IterationLimitError(NumericalFailure):
    def __init__(self, message, last_residual=None):
        super().__init__(message)
        self.last_residual = last_residual


class SearchFailure(NumericalFailure):
    def __init__(self, message, best_min=None):
        super().__init__(message)
        self.best_min = best_min
