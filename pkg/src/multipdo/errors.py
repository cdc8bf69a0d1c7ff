"""Exception hierarchy shared by all modules.

Validation problems (bad inputs, inconsistent configuration) derive from
``ValidationError`` and map to CLI exit code 1; failures that only show up
while computing (resolution, coverage, cost) derive from ``ComputationError``
and map to exit code 2.
"""


class MultipdoError(Exception):
    """Base class."""


class ValidationError(MultipdoError, ValueError):
    """Input violates a documented precondition."""

    def __init__(self, message: str, field: str | None = None):
        super().__init__(message)
        self.field = field


class ContractError(ValidationError):
    """A value violates a structural contract (shape, support, exponent range)."""


class ConfigurationError(ValidationError):
    """Parameters are individually valid but jointly inconsistent."""


class ComputationError(MultipdoError, RuntimeError):
    """A computation could not be carried out to the requested accuracy."""


class ResolutionError(ComputationError):
    """The sampling grid or quadrature is too coarse for the request."""


class CoverageError(ComputationError):
    """A window family does not cover the spectral support of the input."""


class CostGuardError(ComputationError):
    """A computation would exceed the configured work budget."""


class EvaluationError(ComputationError):
    """A symbol or function evaluation produced non-finite values."""


class FitError(ComputationError):
    """Slope fit impossible (too few or non-positive data points)."""
