"""Exception hierarchy shared by all modules."""


class LatticeError(ValueError):
    """Base class for every error raised by this package."""


class DomainError(LatticeError):
    """An argument is outside the supported range (n < 2, index out of box, ...)."""


class DimensionMismatchError(DomainError):
    """Points or matrices of incompatible sizes were combined."""


class DegenerateFrameError(LatticeError):
    """Frame vectors are linearly dependent, so no determinant ratio exists."""


class CompatibilityError(LatticeError):
    """A transition-matrix family fails the commutation precondition."""


class ParseError(LatticeError):
    """A JSON document does not follow the expected schema.

    ``location`` is a path such as ``neighbors[1][0]`` or ``line 3 column 7``.
    """

    def __init__(self, message, location=None):
        self.location = location
        if location is not None:
            message = f"{message} (at {location})"
        super().__init__(message)
