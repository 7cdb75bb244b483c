"""Exception hierarchy shared by all modules."""


class PeriodMapError(Exception):
    """Base class for every error raised by :mod:`periodmap`."""


class DomainError(PeriodMapError, ValueError):
    """A real power was requested for a negative base with non-integer k."""


class BranchUnavailable(PeriodMapError, ValueError):
    """The sign-changing branch was requested for a k that is not an odd integer."""


class DegenerateOrbit(PeriodMapError, ValueError):
    """The energy level sits at or beyond an endpoint of the admissible range."""


class NoConvergence(PeriodMapError, RuntimeError):
    """An iterative procedure (root bracketing, quadrature ladder, solver) stalled."""


class StepOutOfRange(PeriodMapError, ValueError):
    """A finite-difference stencil leaves the admissible energy interval."""


class TolFailure(PeriodMapError, RuntimeError):
    """A conservation or consistency residual exceeded its tolerance."""


class NearCenter(PeriodMapError, ValueError):
    """The orbit is too close to the center for a well-conditioned computation."""


class AmbiguousZero(PeriodMapError, RuntimeError):
    """An eigenvalue is too close to the zero threshold to classify; refine the grid."""


class NotInRange(PeriodMapError, RuntimeError):
    """The right-hand side has a non-negligible component on the discrete kernel."""
