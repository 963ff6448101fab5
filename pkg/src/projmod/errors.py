"""Exception hierarchy shared by all modules."""


class ProjmodError(Exception):
    """Base class for every error raised by projmod."""


class BackendMismatch(ProjmodError):
    pass


class DegreeOverflow(ProjmodError):
    """A product would need Fourier modes beyond the configured cap."""


class NotInvertible(ProjmodError):
    pass


class BadDimension(ProjmodError):
    pass


class NotIdempotent(ProjmodError):
    pass


class NoConvergence(ProjmodError):
    pass


class NotInNeighborhood(ProjmodError):
    """The similarity witness for a pair of idempotents is not invertible.

    ``step`` is set by path lifting to the 1-based index of the failing step.
    """

    def __init__(self, msg, step=None):
        super().__init__(msg)
        self.step = step


class NotInvertibleInCorner(ProjmodError):
    pass


class NotAnIsoPair(ProjmodError):
    pass


class NotInModule(ProjmodError):
    pass


class UnknownDerivation(ProjmodError):
    pass


class IdentityViolation(ProjmodError):
    """An algebraic identity that must hold for valid input failed numerically."""
