"""Exception hierarchy shared by every module."""


class MLRHError(Exception):
    """Base class for library errors."""


class DomainError(MLRHError, ValueError):
    """An argument lies outside the region where an operation is defined."""


class SectorError(DomainError):
    """Complex argument outside the sector of the asymptotic expansion."""


class AccuracyError(MLRHError, ArithmeticError):
    pass


class DegenerateError(MLRHError, ArithmeticError):
    """Double Riccati root (A = 0) or another structural degeneracy."""


class SingularSystemError(MLRHError, ArithmeticError):
    pass


class PoleError(MLRHError, ArithmeticError):
    pass


class IntegrationError(MLRHError, ArithmeticError):
    pass


class NoSolutionError(MLRHError, ValueError):
    pass


class SolverOverflowError(MLRHError, OverflowError):
    """Fractional solver iterate blew up."""
