"""Core - configuration, shared models, errors and tracing."""

from .config import Settings, get_settings, settings
from .errors import (
    BoundaryFitError,
    BracketingError,
    ConfigValidationError,
    DomainError,
    InfeasibleDesignError,
    MissingSummaryError,
    NBTrialsError,
    QuadratureAccuracyError,
    TrialValidationError,
    UnderdispersionWarning,
    UnsupportedComparatorError,
)
from .models import (
    AnalysisModel,
    ArmSpec,
    DesignKind,
    DispersionMode,
    EffectMetric,
    EffectSummary,
    FollowUpDesign,
    FollowUpMoments,
    Hypothesis,
    HypothesisKind,
    InfoBound,
    InfoQuantities,
    PowerResult,
    RoundingMode,
    SimReport,
    SizingResult,
    TrialSpec,
)

__all__ = [
    "Settings",
    "get_settings",
    "settings",
    "NBTrialsError",
    "DomainError",
    "QuadratureAccuracyError",
    "BracketingError",
    "TrialValidationError",
    "InfeasibleDesignError",
    "UnsupportedComparatorError",
    "BoundaryFitError",
    "MissingSummaryError",
    "ConfigValidationError",
    "UnderdispersionWarning",
    "AnalysisModel",
    "ArmSpec",
    "DesignKind",
    "DispersionMode",
    "EffectMetric",
    "EffectSummary",
    "FollowUpDesign",
    "FollowUpMoments",
    "Hypothesis",
    "HypothesisKind",
    "InfoBound",
    "InfoQuantities",
    "PowerResult",
    "RoundingMode",
    "SimReport",
    "SizingResult",
    "TrialSpec",
]
