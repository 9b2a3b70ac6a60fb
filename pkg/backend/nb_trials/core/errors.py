"""Error kinds raised across the package."""

from __future__ import annotations

from typing import Optional


class NBTrialsError(Exception):
    """Base class for every error raised by nb_trials."""


class DomainError(NBTrialsError, ValueError):
    """An argument lies outside the domain of the operation."""


class QuadratureAccuracyError(NBTrialsError, ArithmeticError):
    """Adaptive quadrature stopped before reaching the requested tolerance."""

    def __init__(self, message: str, estimate: float, abs_error: float) -> None:
        super().__init__(message)
        self.estimate = estimate
        self.abs_error = abs_error


class BracketingError(NBTrialsError, ValueError):
    """The interval handed to a root finder does not bracket a sign change."""


class TrialValidationError(NBTrialsError, ValueError):
    """Hypothesis, margins and rates do not describe a testable trial."""


class InfeasibleDesignError(NBTrialsError, ValueError):
    """No finite sample size reaches the requested power."""


class UnsupportedComparatorError(NBTrialsError, ValueError):
    """The mean follow-up comparator cannot be applied to this trial."""


class BoundaryFitError(NBTrialsError, RuntimeError):
    """The likelihood has no interior maximum (e.g. an arm without events)."""


class MissingSummaryError(NBTrialsError, ValueError):
    """A published summary lacks a quantity the back-calculation needs."""


class ConfigValidationError(NBTrialsError, ValueError):
    """A command-line configuration was rejected; carries the exit code."""

    def __init__(self, message: str, exit_code: int = 2, field: Optional[str] = None) -> None:
        super().__init__(message)
        self.exit_code = exit_code
        self.field = field


class UnderdispersionWarning(UserWarning):
    """Dispersion estimate below the Poisson level; κ reported as 0."""
