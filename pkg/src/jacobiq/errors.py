"""Exception hierarchy shared by every module of the package."""


class JacobiqError(Exception):
    """Base class for all errors raised by jacobiq."""


class GridError(JacobiqError):
    """An exponent does not lie on the declared denominator grid."""


class WindowError(JacobiqError):
    """A term or query lies outside the guaranteed validity window."""


class DirectionError(JacobiqError):
    """Two operands were expanded in incompatible y-directions."""


class NotInvertible(JacobiqError):
    """The leading slice has no extreme monomial in the requested direction."""


class ParameterError(JacobiqError, ValueError):
    """A generator received parameters outside its domain."""


class ConventionUnresolved(JacobiqError):
    """No candidate normalisation reproduced the reference data.

    The structured report is kept on ``self.record``.
    """

    def __init__(self, message, record=None):
        super().__init__(message)
        self.record = record


class DomainError(JacobiqError):
    """A numerical evaluation was requested outside the convergence region."""


class LatticeError(DomainError):
    """The point lies on the excluded lattice N*alpha in Z + Z*tau."""


class SearchError(JacobiqError):
    """A bounded search was exhausted without finding a solution."""


class NearSingular(DomainError):
    """The evaluation point is numerically too close to a zero or pole."""


class ConditioningError(JacobiqError):
    """A least-squares problem was too ill-conditioned to trust."""
