"""Exception types raised across the package.

Collected in one module so the CLI can map them onto exit codes without
importing every solver.
"""


class ZermeloError(Exception):
    """Base class for all package-specific errors."""


class ZeroSpeed(ZermeloError):
    """Curvature requested at a point with vanishing first derivative."""


class ZeroCostate(ZermeloError):
    """Maximizer requested for the zero costate, where it is not unique."""


class RayMisses(ZermeloError):
    """The ray from the origin never enters the set."""


class OriginOutside(ZermeloError):
    """The origin is not an interior point of the control set."""


class StrictConvexityViolated(ZermeloError):
    """Boundary curvature indicator vanishes or changes sign."""


class NonFiniteState(ZermeloError):
    """Integration produced NaN or infinite state values."""


class DegenerateCurvature(ZermeloError):
    """Heading ODE denominator below tolerance at the requested angle."""


class NoHit(ZermeloError):
    """No scanned costate angle steers the state into the target ball."""

    def __init__(self, message: str, best_miss: float = float("inf"),
                 best_angle: float = float("nan")):
        super().__init__(message)
        self.best_miss = best_miss
        self.best_angle = best_angle


class Unreachable(ZermeloError):
    """Net speed toward the target is zero: the current wins."""


class NoRoot(ZermeloError):
    """Scalar root search found no admissible root."""


class TargetUnreachable(ZermeloError):
    """Closed-form example target outside the solvable region."""


class NotConverged(ZermeloError):
    """Value iteration did not settle within the sweep budget."""


class StartOutsideGrid(ZermeloError):
    """Start or target lies outside the value-iteration grid."""


class ConfigInvalid(ZermeloError):
    """Scenario configuration violates the schema."""

    def __init__(self, field: str, message: str):
        super().__init__(f"{field}: {message}")
        self.field = field


class SolverFailed(ZermeloError):
    """A requested solver raised; carries the underlying error."""


class ReportInvalid(ZermeloError):
    """Report files are unreadable or refer to different scenarios."""
