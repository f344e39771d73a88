"""Exception types raised across the package."""


class LogLinearError(Exception):
    """Base class for all package errors."""


class StructureViolation(LogLinearError, ValueError):
    """Matrix does not have the se(2) zero/skew pattern."""


class BranchSingularity(LogLinearError, ValueError):
    """Rotation angle too close to +-pi for log / distortion-matrix evaluation."""


class AngleWrap(LogLinearError):
    """Invariant set reaches the +-pi heading boundary, where the log-linear model no longer holds."""


class NotStabilizable(LogLinearError):
    pass


class NoConvergence(LogLinearError):
    pass


class Infeasible(LogLinearError):
    pass


class IllConditioned(LogLinearError):
    pass


class DegenerateVelocity(LogLinearError, ValueError):
    pass


class SpanTooLarge(LogLinearError, ValueError):
    pass


class Degenerate(LogLinearError, ValueError):
    """Point set has no 2-D convex hull (all points collinear)."""


class Divergence(LogLinearError):
    pass


class ScenarioError(LogLinearError, ValueError):
    pass
