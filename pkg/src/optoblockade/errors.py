"""Exception hierarchy shared by all computation routes."""


class BlockadeError(Exception):
    """Base class for library errors."""


class DomainError(BlockadeError, ValueError):
    """An argument lies outside the domain of the operation."""


class ConfigurationError(BlockadeError, ValueError):
    """Solver or integrator settings are invalid (e.g. step size too large)."""


class WeakDriveError(DomainError):
    """A perturbative/analytic route was asked to run with Omega >= gamma_c."""


class NumericalError(BlockadeError, ArithmeticError):
    """A numerical procedure failed to produce a trustworthy result."""


class UndefinedCorrelationError(NumericalError):
    """Mean photon number is (numerically) zero, so g2/g3 are undefined."""


class DegenerateSteadyStateError(NumericalError):
    """The Liouvillian null space is not one-dimensional."""


class IterationLimitError(NumericalError):
    """An iterative fallback did not converge within its step budget."""


class UnphysicalStateError(NumericalError):
    """A density matrix violates positivity beyond the repair tolerance."""


class WeakDriveWarning(UserWarning):
    """Emitted by the master-equation route when Omega >= gamma_c."""
