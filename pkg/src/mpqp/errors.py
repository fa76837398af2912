"""Exception hierarchy."""


class MpqpError(Exception):
    """Base class for all errors raised by this package."""


class DimensionMismatch(MpqpError, ValueError):
    pass


class NotSymmetric(MpqpError, ValueError):
    pass


class NotPositiveDefinite(MpqpError, ValueError):
    pass


class ParseError(MpqpError, ValueError):
    """Malformed problem document. ``field`` and ``line`` locate the fault when known."""

    def __init__(self, message, field=None, line=None):
        where = []
        if field is not None:
            where.append(f"field {field!r}")
        if line is not None:
            where.append(f"line {line}")
        if where:
            message = f"{message} ({', '.join(where)})"
        super().__init__(message)
        self.field = field
        self.line = line


class DegenerateRow(MpqpError, ValueError):
    """A polyhedron row has a zero normal vector."""


class Infeasible(MpqpError):
    pass


class Unbounded(MpqpError):
    pass


class MaxIterations(MpqpError, RuntimeError):
    pass


class InfeasibleParameter(MpqpError):
    """No z satisfies G z <= W + S x at the requested parameter."""


class LicqViolated(MpqpError):
    pass


class SingularGram(MpqpError):
    pass


class EmptyRegion(MpqpError):
    """A candidate region contains a constant inequality that can never hold."""


class PointNotInRegion(MpqpError):
    pass


class BoundaryPoint(MpqpError):
    pass


class OutsideFeasibleSet(MpqpError):
    pass


class NoSharedBoundary(MpqpError):
    pass


class InconsistentActiveSet(MpqpError, ValueError):
    pass
