"""Exception hierarchy shared across the package."""


class WzLabError(Exception):
    """Base class for all package errors."""


class SingularCovariance(WzLabError):
    """Covariance of the conditioning variable is numerically singular."""


class NotConverged(WzLabError):
    """Iterative diagonalization failed to converge."""


class DomainError(WzLabError):
    """Argument outside the mathematical domain of the operation."""


class DimensionMismatch(WzLabError):
    """Inconsistent vector/matrix dimensions."""


class DegenerateShaping(WzLabError):
    """All reproduction points received zero shaping weight."""


class InvalidRegime(WzLabError):
    """Parameters outside the regime where the bound machinery is valid."""


class QuadratureFailure(WzLabError):
    """Numerical integration did not reach the requested tolerance."""


class MetricUnderflow(WzLabError):
    """Every list-search path became impossible (infinite penalty)."""


class MissingDataFile(WzLabError):
    """A required data file is absent or fails its checksum."""


class AllocationOverflow(WzLabError):
    """Requested bit roles do not fit into the code block."""


class ConfigError(WzLabError):
    """Invalid experiment or codec configuration."""
