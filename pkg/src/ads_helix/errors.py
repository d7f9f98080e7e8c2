"""Exception hierarchy shared by the library and the CLI."""


class AdsHelixError(Exception):
    """Base class for all package errors."""


class ParameterError(AdsHelixError, ValueError):
    """Ambient or surface parameters violate their admissibility conditions."""


class MembershipError(AdsHelixError, ValueError):
    """A point is off the quadric, or a vector is not tangent to it."""


class FiniteDifferenceError(AdsHelixError, ArithmeticError):
    """A finite-difference estimate is unreliable (step too small, or the
    Richardson levels disagree)."""


class DomainError(AdsHelixError, ValueError):
    """A stencil would leave the parameter domain of an immersion."""


class DegenerateSurfaceError(AdsHelixError, ArithmeticError):
    """The immersion is singular or has a lightlike tangent plane."""


class HopfTubeError(DegenerateSurfaceError):
    """The surface is a Hopf tube: the Hopf field is everywhere tangent."""


class ConstraintSingularityError(AdsHelixError, ArithmeticError):
    """The coefficient of the unknown derivative in a family constraint vanished.

    Attributes:
        y: parameter value where the coefficient fell below the guard.
    """

    def __init__(self, message, y=None):
        super().__init__(message)
        self.y = y
