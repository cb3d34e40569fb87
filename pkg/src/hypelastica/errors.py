"""Exception hierarchy shared by the package.

Every solver failure maps to one class so the command line can turn it
into a distinct exit code.
"""


class ElasticaError(Exception):
    """Base class for all package errors."""

    exit_code = 1


class DomainError(ElasticaError, ValueError):
    """An argument lies outside the domain of the operation."""

    exit_code = 1


class NoElasticaError(ElasticaError, ValueError):
    """No elastica has the requested curvature data."""

    exit_code = 2


class DegenerateElasticaError(ElasticaError, ValueError):
    """Parameters fall on the excluded locus kappa0^2 = lambda + 4."""

    exit_code = 3


class NoRootError(ElasticaError):
    """A closing condition has no root in the scanned bracket."""

    exit_code = 4


class MOutOfWindowError(ElasticaError):
    """The winding integer of a root lies outside the search window."""

    exit_code = 5


class CertificationError(ElasticaError):
    """A sampled curve failed one of its post-condition checks."""

    exit_code = 6


class NotAnElasticaError(CertificationError):
    """The closed-form representation did not produce a unit-speed curve."""


class AmbiguousTurningNumber(CertificationError):
    """The exterior-angle sum is too far from an integer multiple of 2 pi."""


class CurveError(ElasticaError, ValueError):
    """A sampled curve violates its invariants."""

    exit_code = 1


class StiffnessError(ElasticaError):
    """Time step fell below the floor while trying to decrease energy."""

    exit_code = 7

    def __init__(self, message, state=None):
        super().__init__(message)
        self.state = state


class ModelBreakdownError(ElasticaError):
    """The flow pushed a sample out of the upper half-plane."""

    exit_code = 7

    def __init__(self, message, state=None):
        super().__init__(message)
        self.state = state
