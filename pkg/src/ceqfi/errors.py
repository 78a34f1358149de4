"""Exception and warning types raised across the package."""


class CeqfiError(Exception):
    """Base class for all package errors."""


class NonHermitian(CeqfiError, ValueError):
    """A matrix that must be Hermitian is not, beyond tolerance."""


class DimensionMismatch(CeqfiError, ValueError):
    pass


class InvalidProbabilities(CeqfiError, ValueError):
    pass


class OutOfRange(CeqfiError, ValueError):
    pass


class OutOfDomain(CeqfiError, ValueError):
    """Parameters lie outside the validity domain of a closed-form bound."""


class DegenerateChannel(CeqfiError, ValueError):
    """The Kraus operators are linearly dependent (declared rank too large)."""


class WrongRank(CeqfiError, ValueError):
    pass


class UpperHemisphere(CeqfiError, ValueError):
    """Stereographic projection requested for a direction with n3 > 0."""


class OutOfDisk(CeqfiError, ValueError):
    pass


class AllInfeasible(CeqfiError):
    """No direction on the grid admits a gauge with beta = 0."""


class NotCovariant(CeqfiError, ValueError):
    """An instrument Kraus operator does not commute with the conserved observable."""


class ParseError(CeqfiError, ValueError):
    pass


class ValidationError(CeqfiError, ValueError):
    pass


class SolverStall(RuntimeWarning):
    """Emitted when the norm minimization hits its iteration cap.

    The accompanying result is still a valid (possibly loose) upper bound.
    """
