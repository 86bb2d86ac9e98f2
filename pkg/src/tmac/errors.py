"""Exception types raised by the engine."""

from __future__ import annotations


class EngineError(Exception):
    """Base class for all engine failures."""


class _DiagnosticError(EngineError):
    """Failure that carries the validator diagnostics which caused it."""

    def __init__(self, message: str, diagnostics=()):
        self.diagnostics = list(diagnostics)
        if self.diagnostics:
            message += ": " + "; ".join(d.message for d in self.diagnostics)
        super().__init__(message)


class ModelValidationError(_DiagnosticError):
    def __init__(self, diagnostics):
        super().__init__("model failed validation", diagnostics)


class CatalogValidationError(_DiagnosticError):
    def __init__(self, diagnostics):
        super().__init__("catalog failed validation", diagnostics)


class ElicitationError(_DiagnosticError):
    def __init__(self, diagnostics):
        super().__init__("elicitation inputs are inconsistent", diagnostics)


class UnknownScopeError(EngineError, LookupError):
    def __init__(self, name: str):
        super().__init__(f"unknown scope '{name}'")
        self.name = name


class UnknownThreatError(EngineError, LookupError):
    def __init__(self, threat_id: str):
        super().__init__(f"unknown threat '{threat_id}'")
        self.threat_id = threat_id


class AssessmentError(EngineError):
    """Raised when likelihood or assessment preconditions are violated."""


class ScenarioError(EngineError):
    """Raised when a scenario references unknown scopes or threats."""


class ReportMismatchError(EngineError):
    """Raised when two assessment reports cannot be compared."""
