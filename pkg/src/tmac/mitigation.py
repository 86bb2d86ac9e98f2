"""Scenario application and before/after assessment diffs.

A scenario clears markings (set semantics) rather than subtracting counts, so
overlapping scopes cannot drive counts negative: a shared interaction is
cleared once. For pairwise disjoint scopes the residual count equals the
total minus the per-scope counts exactly; on overlap the engine warns that
this arithmetic identity does not apply. Consequence values are never touched
by a scenario.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from fractions import Fraction
from types import MappingProxyType

from .catalog import PetScenario
from .elicitation import AppliedScenario, MarkingMatrix
from .errors import ReportMismatchError, ScenarioError
from .risk import AssessmentReport, ThreatAssessment


class ScopeOverlapWarning(UserWarning):
    """Cleared scopes share flows; per-scope counts do not sum to the residual."""


def apply_scenario(matrix: MarkingMatrix, scenario: PetScenario) -> MarkingMatrix:
    """Return a new matrix with the scenario's markings cleared.

    Every true cell whose interaction belongs to a cleared scope and whose
    threat passes the filter is set false and records the scenario name as
    provenance; all other cells are untouched. The input matrix is never
    mutated. Application is idempotent and commutes across scenarios.
    """
    if not scenario.clears:
        raise ScenarioError(f"scenario '{scenario.name}' clears no scopes")
    model = matrix.model
    covered_flows: set[str] = set()
    member_total = 0
    for scope_name in scenario.clears:
        scope = model.scopes_by_name.get(scope_name)
        if scope is None:
            raise ScenarioError(f"scenario '{scenario.name}' clears unknown scope '{scope_name}'")
        members = set(scope.members)
        member_total += len(members)
        covered_flows |= members
    if member_total > len(covered_flows):
        warnings.warn(
            f"scenario '{scenario.name}' clears overlapping scopes; shared "
            "interactions are cleared once and per-scope counts do not sum "
            "to the residual", ScopeOverlapWarning, stacklevel=2)

    known_threats = set(matrix.threats)
    if scenario.threat_filter is not None:
        for threat_id in scenario.threat_filter:
            if threat_id not in known_threats:
                raise ScenarioError(f"scenario '{scenario.name}' filters unknown threat '{threat_id}'")
        cleared_threats = set(scenario.threat_filter)
    else:
        cleared_threats = known_threats

    covered_ordinals = {i.ordinal for i in matrix.interactions if i.flow in covered_flows}

    def covered(cell: tuple[int, str]) -> bool:
        ordinal, threat_id = cell
        return ordinal in covered_ordinals and threat_id in cleared_threats

    new_marks = {cell: prov for cell, prov in matrix.marks.items() if not covered(cell)}

    # Cells this scenario covers that were true, now or before an earlier
    # clear, accumulate its name; ordering never affects the stored sets.
    new_cleared = dict(matrix.cleared)
    for cell in matrix.marks:
        if covered(cell):
            new_cleared[cell] = (scenario.name,)
    for cell, names in matrix.cleared.items():
        if covered(cell):
            new_cleared[cell] = tuple(sorted(set(names) | {scenario.name}))

    applied = AppliedScenario(
        name=scenario.name,
        cleared_scopes=tuple(scenario.clears),
        threat_filter=tuple(scenario.threat_filter) if scenario.threat_filter is not None else None,
    )
    applied_set = tuple(sorted(
        set(matrix.applied) | {applied},
        key=lambda a: (a.name, a.cleared_scopes, a.threat_filter or ())))

    return MarkingMatrix(
        model=matrix.model,
        catalog=matrix.catalog,
        interactions=matrix.interactions,
        threats=matrix.threats,
        marks=MappingProxyType(new_marks),
        cleared=MappingProxyType(new_cleared),
        applied=applied_set,
    )


@dataclass(frozen=True)
class DiffRow:
    """Per-threat before/after comparison."""

    threat: str
    occurrences_before: int
    occurrences_after: int
    removed: int
    risk_before: Fraction
    risk_after: Fraction
    risk_before_display: str
    risk_after_display: str
    band_before: str
    band_after: str
    changed: bool


@dataclass(frozen=True)
class DiffReport:
    """Comparison of two assessments of the same model and band config."""

    model_name: str
    total_interactions: int
    band_fingerprint: str
    baseline_scenario: str | None
    mitigated_scenario: str | None
    cleared_scopes: tuple[str, ...]
    rows: tuple[DiffRow, ...]

    @property
    def transitions(self) -> tuple[DiffRow, ...]:
        return tuple(row for row in self.rows if row.changed)


def _identity(row: ThreatAssessment) -> tuple:
    return (row.catalog_index, row.initial_consequence, row.aggravation_count, row.consequence)


def diff(baseline: AssessmentReport, mitigated: AssessmentReport) -> DiffReport:
    """Per-threat deltas and band transitions, in catalog row order.

    The reports must cover the same interactions, threat catalog, band
    configuration, and scope restriction; anything else is incomparable.
    """
    if baseline.total_interactions != mitigated.total_interactions:
        raise ReportMismatchError("reports cover different interaction counts")
    if baseline.band_fingerprint != mitigated.band_fingerprint:
        raise ReportMismatchError("reports use different band configurations")
    if baseline.scope != mitigated.scope:
        raise ReportMismatchError("reports use different scope restrictions")

    before = {row.threat: row for row in baseline.rows}
    after = {row.threat: row for row in mitigated.rows}
    if set(before) != set(after):
        raise ReportMismatchError("reports cover different threat catalogs")

    rows = []
    for threat_id in sorted(before, key=lambda t: before[t].catalog_index):
        b, a = before[threat_id], after[threat_id]
        if _identity(b) != _identity(a):
            raise ReportMismatchError(f"threat '{threat_id}' differs between the report catalogs")
        rows.append(DiffRow(
            threat=threat_id,
            occurrences_before=b.occurrence_count,
            occurrences_after=a.occurrence_count,
            removed=b.occurrence_count - a.occurrence_count,
            risk_before=b.risk,
            risk_after=a.risk,
            risk_before_display=b.risk_display,
            risk_after_display=a.risk_display,
            band_before=b.band,
            band_after=a.band,
            changed=b.band != a.band,
        ))

    return DiffReport(
        model_name=baseline.model_name,
        total_interactions=baseline.total_interactions,
        band_fingerprint=baseline.band_fingerprint,
        baseline_scenario=baseline.scenario,
        mitigated_scenario=mitigated.scenario,
        cleared_scopes=mitigated.cleared_scopes,
        rows=tuple(rows),
    )
