"""Exception types shared across the library."""


class DesignError(Exception):
    """Base class for domain and numerical failures raised by this package."""


class QuadratureError(DesignError):
    """Adaptive quadrature stopped before reaching the requested tolerance."""

    def __init__(self, message: str, achieved: float | None = None,
                 requested: float | None = None):
        super().__init__(message)
        self.achieved = achieved
        self.requested = requested


class SingularInformationError(DesignError):
    """Information matrix is numerically singular for the requested solve."""


class InfeasibleEfficiencyError(DesignError):
    """Requested efficiency exceeds the feasible bound of the construction."""

    def __init__(self, message: str, alpha0: float | None = None):
        super().__init__(message)
        self.alpha0 = alpha0


class DegenerateWeightError(DesignError):
    """Every mass-shedding coefficient vanishes; the feasibility bound is undefined."""


class RankDeficiencyError(DesignError):
    """A design matrix has insufficient rank for the requested fit."""


class ConditioningError(DesignError):
    """A linear solve failed its residual bound."""
