"""Exception types shared across the package."""


class SphereLangevinError(Exception):
    """Base class for all package-specific errors."""


class ShapeMismatchError(SphereLangevinError, ValueError):
    """Operands live on different product manifolds or have wrong dimensions."""


class CutLocusError(SphereLangevinError, ValueError):
    """Raised when a factor pair is (numerically) antipodal and the log map
    or geodesic direction is undefined."""


class NumericalFailure(SphereLangevinError, RuntimeError):
    """A series evaluation or sampler exceeded its budget or lost precision
    beyond what the requested tolerances allow."""


class GraphFormatError(SphereLangevinError, ValueError):
    """Malformed graph input. Carries the 1-based line number when known."""

    def __init__(self, message, line=None):
        if line is not None:
            message = "line %d: %s" % (line, message)
        super().__init__(message)
        self.line = line
