"""Exception types shared across the package."""


class LogMinkError(Exception):
    """Base class for every failure raised by this package."""


class UnboundedBody(LogMinkError):
    """Halfspace normals do not positively span, so the body is unbounded."""


class DimensionUnsupported(LogMinkError):
    """Exact geometry is only implemented for ambient dimension <= 4."""


class DegenerateBody(LogMinkError):
    """The halfspace intersection has (numerically) zero volume."""


class ToleranceUnreachable(LogMinkError):
    """A certified bound would need more samples than the configured budget."""


class SubspacesNotOrthogonal(LogMinkError):
    """Direct-sum factors must live in orthogonal complementary subspaces."""


class OrderCapExceeded(LogMinkError):
    """Group generation passed the order cap; the mirrors likely generate an infinite group."""


class NormalsDegenerate(LogMinkError):
    """Reflection normals do not span the ambient space."""


class NumericalRankAmbiguity(LogMinkError):
    """Eigenvalue gaps stayed in the undecidable band; refusing to guess the decomposition."""


class MeasureNotInvariant(LogMinkError):
    """The measure is not invariant under the given group."""


class MassMismatch(LogMinkError):
    """Wasserstein distance requires equal total masses; use the bounded-Lipschitz distance instead."""


class ParameterOutOfRange(LogMinkError):
    """A numeric parameter is outside its admissible range."""


class CutsOverlap(LogMinkError):
    """Corner cuts are too large to stay disjoint."""


class ConditionViolated(LogMinkError):
    """The subspace concentration condition fails, so no solution exists."""

    def __init__(self, message, witness=None):
        super().__init__(message)
        self.witness = witness


class Stalled(LogMinkError):
    """The iteration plateaued, typically near an equality (direct-sum) instance."""

    def __init__(self, message, report=None):
        super().__init__(message)
        self.report = report


class MaxIterExceeded(LogMinkError):
    """The iteration cap was reached before meeting the residual tolerance."""

    def __init__(self, message, report=None):
        super().__init__(message)
        self.report = report


class VerificationFailed(LogMinkError):
    """A solution failed recheck; ``clause`` names the failing condition."""

    def __init__(self, message, clause=None):
        super().__init__(message)
        self.clause = clause


class SerializationError(LogMinkError):
    """Malformed JSON input; message carries the offending field."""
