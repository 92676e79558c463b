"""
Exception hierarchy for the Laplace toolkit.

Every error carries the process exit code the CLI maps it to:
1 for configuration / schema problems, 2 for numerical-quality failures.
"""

from typing import Optional, Sequence


class LaplaceToolkitError(Exception):
    """Base class for all toolkit errors."""

    exit_code: int = 1


class ConfigurationError(LaplaceToolkitError, ValueError):
    """Invalid configuration (non-positive truncation, bad parameters...)."""

    exit_code = 1


class DomainError(LaplaceToolkitError, ValueError):
    """Argument outside the mathematical domain of an operation."""

    exit_code = 1


class RegistryError(LaplaceToolkitError, ValueError):
    """Unknown registry name or parameters a factory cannot accept."""

    exit_code = 1


class NumericalQualityError(LaplaceToolkitError, ArithmeticError):
    """Base class for failures of a numerical method to meet its target."""

    exit_code = 2


class SeriesNonConvergenceError(NumericalQualityError):
    """Series summation hit max_terms or lost all accuracy to cancellation."""

    def __init__(self, message: str, terms: Optional[int] = None):
        super().__init__(message)
        self.terms = terms


class DivergenceError(NumericalQualityError):
    """The requested integral does not converge at the given point."""


class QuadratureError(NumericalQualityError):
    """Panel refinement exceeded its cap without meeting rel_tol."""


class DecayViolationError(NumericalQualityError):
    """Sampled |F| exceeds the declared decay majorant by more than 10x."""

    def __init__(self, message: str, ratio: float = float("nan")):
        super().__init__(message)
        self.ratio = ratio


class DecayCheckError(NumericalQualityError):
    """Resolvent failed the numerical decay check in strict mode."""


class OverflowGuardError(NumericalQualityError):
    """Post-Widder scaling left the representable floating point range."""


class SingularPencilError(NumericalQualityError):
    """Matrix pencil (or resolvent) is singular or too ill-conditioned."""

    def __init__(self, message: str, point: Sequence[complex] = (), condition: float = float("inf")):
        super().__init__(message)
        self.point = tuple(point)
        self.condition = condition
