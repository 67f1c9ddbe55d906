"""Exception types shared across the package."""


class FlexArrayError(Exception):
    """Base class for all domain errors raised by this package."""


class PatternBoundaryError(FlexArrayError, ValueError):
    """Derivative requested within the exclusion band of a pattern support edge."""


class RankDeficiencyError(FlexArrayError, ValueError):
    """Channel matrix too ill conditioned for zero-forcing."""

    def __init__(self, condition: float, message: str | None = None):
        self.condition = condition
        super().__init__(message or f"channel gram condition {condition:.3e} exceeds limit")


class SingularFisherError(FlexArrayError, ValueError):
    """Fisher matrix not invertible at the requested tolerance."""

    def __init__(self, condition: float, message: str | None = None):
        self.condition = condition
        super().__init__(message or f"fisher condition {condition:.3e} exceeds limit")


class GramConditionError(FlexArrayError, ValueError):
    """GP gram matrix remains ill conditioned after jitter escalation."""


class OptimizationError(FlexArrayError, RuntimeError):
    """Every candidate of a search failed to evaluate."""


class ConfigError(FlexArrayError, ValueError):
    """Invalid experiment configuration value."""
