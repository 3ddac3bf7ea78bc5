"""Exception types raised across the package."""


class ElasticaError(Exception):
    """Base class for every error raised by pinned_elastica."""


class DomainError(ElasticaError, ValueError):
    """An argument lies outside the domain of the requested function."""


class SingularPointError(DomainError):
    """The function is singular at (or numerically too close to) the argument."""


class BranchInfeasibleError(DomainError):
    """g(q) = c has no solution on the requested monotone branch."""


class InfeasibleModeError(ElasticaError, ValueError):
    """An arc was requested with a mode below the admissible floor."""


class ConsistencyError(ElasticaError, ValueError):
    """A critical point does not satisfy n^2 g(q) = lambda ell^2 for the given params."""


class SamplingError(ElasticaError, ValueError):
    """Too few samples requested."""


class IncompatibleBoundaryError(ElasticaError, ValueError):
    """Initial curve violates the pinned / Navier boundary data."""


class ResolutionError(ElasticaError, ValueError):
    """Flow mesh is too coarse."""


class StepFailure(ElasticaError, RuntimeError):
    """A flow step could not be taken; retry with a smaller time step."""


class ModeError(ElasticaError, ValueError):
    """The requested rule only applies to one-mode critical points."""


class NotApplicableError(ElasticaError, ValueError):
    """The requested quantity is only defined at a specific parameter value."""
