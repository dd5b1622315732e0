"""
Exceptions and warnings shared by the analysis modules.

Everything an analysis can fail with derives from AnalysisError (the CLI turns it
into exit status 2). Bad configuration is a ConfigError, which is a ValueError
like the missing-key errors raised by the settings loader (exit status 1).
"""

from typing import List, Optional


class AnalysisError(Exception):
    """Base class for numerical or physical failures of an analysis."""


class ConfigError(ValueError):
    """Invalid configuration, descriptor or expression."""


class HilbertAccuracyError(AnalysisError):
    def __init__(self, message: str, estimate: float):
        super().__init__(f"{message} (achieved error estimate {estimate:.3e})")
        self.estimate = estimate


class UnsupportedOrderError(AnalysisError):
    pass


class CriticalContourError(AnalysisError):
    """The Penrose contour touches the origin; the winding number is ill-defined."""

    def __init__(self, message: str, u_c: Optional[float] = None):
        super().__init__(message)
        self.u_c = u_c


class CriticalStateNotFound(AnalysisError):
    pass


class DomainError(AnalysisError):
    pass


class RegionDegenerateError(AnalysisError):
    """A counting rectangle passes (numerically) through a zero."""

    def __init__(self, message: str, point: complex):
        super().__init__(message)
        self.point = point


class NoConvergenceError(AnalysisError):
    def __init__(self, message: str, trace: Optional[List[complex]] = None):
        super().__init__(message)
        self.trace = trace or []


class SymmetryViolationError(AnalysisError):
    pass


class PoleLikeError(AnalysisError):
    pass


class RefinementRequired(AnalysisError):
    pass


class EmbeddedModeError(AnalysisError):
    pass


class CriticalModelError(AnalysisError):
    pass


class StabilityWarning(UserWarning):
    pass


class TailTruncationWarning(StabilityWarning):
    pass


class UncheckedRegimeWarning(StabilityWarning):
    pass


class WindingMismatchWarning(StabilityWarning):
    pass


class VanishingIntegralWarning(StabilityWarning):
    pass
