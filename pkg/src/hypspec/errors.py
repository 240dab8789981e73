"""Exception taxonomy shared across the package.

The CLI maps these onto exit codes: validation/domain problems exit 2,
resource caps exit 3, solver failures exit 4.
"""


class HypspecError(Exception):
    """Base class for all package errors."""


class InvalidGeometryError(HypspecError):
    """Side lengths or angles that do not describe a hyperbolic figure."""


class SpecValidationError(HypspecError):
    """A surface description violates a structural requirement."""


class InvalidInputError(HypspecError):
    """An argument is outside the documented domain."""


class MeshQualityError(HypspecError):
    """A mesh element is too degenerate for stable assembly."""


class ResourceLimitError(HypspecError):
    """A requested computation exceeds the configured size cap."""


class ConvergenceError(HypspecError):
    """The iterative eigensolver ran out of iterations.

    Carries the best residual norms seen so far in ``residuals``.
    """

    def __init__(self, message, residuals=None):
        super().__init__(message)
        self.residuals = residuals


class InternalConsistencyError(HypspecError):
    """A mathematical invariant failed; indicates a bug, not bad input."""
