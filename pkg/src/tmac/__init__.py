"""Threat-modeling-as-code: DFD models, interaction-based privacy threat
elicitation, exact-arithmetic risk scoring, and PET what-if analysis."""

from .catalog import (
    Catalog,
    MisactorKind,
    PetScenario,
    Threat,
    consequence,
    default_catalog,
    validate_catalog,
)
from .diagnostics import Diagnostic, Severity
from .dsl import Document, ParseResult, parse, render
from .elicitation import (
    AppliedScenario,
    MarkingMatrix,
    Provenance,
    Rule,
    RuleSet,
    elicit,
    evaluate_rule,
    occurrences,
)
from .errors import (
    AssessmentError,
    CatalogValidationError,
    ElicitationError,
    EngineError,
    ModelValidationError,
    ReportMismatchError,
    ScenarioError,
    UnknownScopeError,
    UnknownThreatError,
)
from .mitigation import (
    DiffReport,
    DiffRow,
    ScopeOverlapWarning,
    apply_scenario,
    diff,
)
from .model import (
    Element,
    ElementKind,
    ExplicitMark,
    Flow,
    Interaction,
    MarkEffect,
    Model,
    Scope,
    enumerate_interactions,
    scope_members,
    validate_model,
)
from .report import ReportFormat, render_assessment, render_diff, render_matrix
from .risk import (
    DEFAULT_BAND_CONFIG,
    AssessmentReport,
    Band,
    BandConfig,
    RiskCapWarning,
    ThreatAssessment,
    assess,
    band_of,
    format_exact,
    likelihood,
    parse_band_spec,
    pia,
    prioritize,
)

__version__ = "0.1.0"

__all__ = [
    "AppliedScenario",
    "AssessmentError",
    "AssessmentReport",
    "Band",
    "BandConfig",
    "Catalog",
    "CatalogValidationError",
    "DEFAULT_BAND_CONFIG",
    "Diagnostic",
    "DiffReport",
    "DiffRow",
    "Document",
    "Element",
    "ElementKind",
    "ElicitationError",
    "EngineError",
    "ExplicitMark",
    "Flow",
    "Interaction",
    "MarkEffect",
    "MarkingMatrix",
    "MisactorKind",
    "Model",
    "ModelValidationError",
    "ParseResult",
    "PetScenario",
    "Provenance",
    "ReportFormat",
    "ReportMismatchError",
    "RiskCapWarning",
    "Rule",
    "RuleSet",
    "ScenarioError",
    "Scope",
    "ScopeOverlapWarning",
    "Severity",
    "Threat",
    "ThreatAssessment",
    "UnknownScopeError",
    "UnknownThreatError",
    "apply_scenario",
    "assess",
    "band_of",
    "consequence",
    "default_catalog",
    "diff",
    "elicit",
    "enumerate_interactions",
    "evaluate_rule",
    "format_exact",
    "likelihood",
    "occurrences",
    "parse",
    "parse_band_spec",
    "pia",
    "prioritize",
    "render",
    "render_assessment",
    "render_diff",
    "render_matrix",
    "scope_members",
    "validate_catalog",
    "validate_model",
]
