"""Exception types shared across the engine."""


class FinslerError(Exception):
    """Base class for all engine errors."""


class ConfigurationError(FinslerError):
    """Invalid user-supplied parameters (family specs, jet orders, plans)."""


class StructuralError(FinslerError):
    """Structurally impossible request, e.g. complexifying an odd-dimensional jet."""


class SlitBundleError(FinslerError):
    """Metric derivative requested too close to the zero section."""


class DomainError(FinslerError):
    """Evaluation outside the validity domain of a metric family."""


class DegenerateMetricError(FinslerError):
    """Fundamental tensor or Levi matrix numerically singular."""


class DegenerateFlagError(FinslerError):
    """Flag plane (u, X) is numerically degenerate."""


class ShootingError(FinslerError):
    """Boundary-value geodesic solve failed to converge."""

    def __init__(self, message, best_residual=None):
        super().__init__(message)
        self.best_residual = best_residual


class HypothesisViolationError(FinslerError):
    """Curvature-bound hypothesis of a comparison theorem is not met."""
