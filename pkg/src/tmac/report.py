"""Render assessments, marking matrices, and diffs as text.

Three formats: markdown tables for humans, CSV for spreadsheets, and a stable
JSON schema for machines. Exact ratios are exported as integer numerator and
denominator plus the display string, so downstream consumers never re-round.
Rendering is pure and byte-deterministic for equal inputs.
"""

from __future__ import annotations

import csv
import io
import json
from enum import Enum
from fractions import Fraction

from .elicitation import MarkingMatrix
from .errors import UnknownScopeError
from .mitigation import DiffReport
from .risk import AssessmentReport


class ReportFormat(str, Enum):
    MARKDOWN = "markdown-table"
    CSV = "comma-separated"
    JSON = "structured-data"


FORMAT_ALIASES = {
    "md": ReportFormat.MARKDOWN,
    "markdown": ReportFormat.MARKDOWN,
    "csv": ReportFormat.CSV,
    "json": ReportFormat.JSON,
}

_ASSESSMENT_COLUMNS = ("Threat", "I", "Ta", "C", "Tn", "L", "PIA", "Prioritization")


def _markdown_table(header: tuple[str, ...], rows: list[tuple[str, ...]]) -> list[str]:
    lines = ["| " + " | ".join(header) + " |",
             "| " + " | ".join("---" for _ in header) + " |"]
    for row in rows:
        lines.append("| " + " | ".join(row) + " |")
    return lines


def _csv_text(header: tuple[str, ...], rows: list[tuple[str, ...]]) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    return buffer.getvalue()


def _json_text(payload: dict) -> str:
    return json.dumps(payload, indent=2) + "\n"


def _ratio_json(value: Fraction, display: str) -> dict:
    return {"num": value.numerator, "den": value.denominator, "display": display}


def _assessment_cells(report: AssessmentReport) -> list[tuple[str, ...]]:
    return [
        (row.threat, str(row.initial_consequence), str(row.aggravation_count),
         str(row.consequence), str(row.occurrence_count),
         row.likelihood_display, row.risk_display, row.band)
        for row in report.rows
    ]


def render_assessment(report: AssessmentReport, fmt: ReportFormat = ReportFormat.MARKDOWN) -> str:
    """One row per threat with I, Ta, C, Tn, L, PIA, and the priority band."""
    if fmt is ReportFormat.CSV:
        return _csv_text(_ASSESSMENT_COLUMNS, _assessment_cells(report))
    if fmt is ReportFormat.JSON:
        payload: dict = {"model": report.model_name, "ti": report.total_interactions}
        if report.scope is not None:
            payload["scope"] = report.scope
        if report.scenario is not None:
            payload["scenario"] = report.scenario
        payload["rows"] = [
            {
                "threat": row.threat,
                "i": row.initial_consequence,
                "ta": row.aggravation_count,
                "c": row.consequence,
                "tn": row.occurrence_count,
                "l": _ratio_json(row.likelihood, row.likelihood_display),
                "pia": _ratio_json(row.risk, row.risk_display),
                "band": row.band,
            }
            for row in report.rows
        ]
        return _json_text(payload)

    lines = [f"Model: {report.model_name}",
             f"Interactions (Ti): {report.total_interactions}"]
    if report.scope is not None:
        lines.append(f"Scope restriction: {report.scope}")
    if report.scenario is not None:
        lines.append(f"Scenario: {report.scenario}")
    lines.append("")
    lines.extend(_markdown_table(_ASSESSMENT_COLUMNS, _assessment_cells(report)))
    return "\n".join(lines) + "\n"


def render_matrix(matrix: MarkingMatrix, fmt: ReportFormat = ReportFormat.MARKDOWN,
                  scope: str | None = None) -> str:
    """Interaction rows against threat columns, marks rendered as ``x``.

    With ``scope`` given only that scope's interactions are shown and the
    totals row carries the scoped per-threat counts; otherwise all
    interactions and the model-wide totals.
    """
    model = matrix.model
    if scope is None:
        rows = matrix.interactions
        total_label = f"Total ({len(rows)} interactions)"
    else:
        declared = model.scopes_by_name.get(scope)
        if declared is None:
            raise UnknownScopeError(scope)
        members = set(declared.members)
        rows = tuple(i for i in matrix.interactions if i.flow in members)
        total_label = f"Total: {scope} ({len(rows)} interactions)"

    totals = {t: 0 for t in matrix.threats}
    for interaction in rows:
        for threat_id in matrix.threats:
            if matrix.value(interaction.ordinal, threat_id):
                totals[threat_id] += 1

    def display_row(interaction) -> tuple[str, ...]:
        source = model.elements_by_id[interaction.source].display_name
        flow = model.flows_by_id[interaction.flow].display_label
        destination = model.elements_by_id[interaction.destination].display_name
        cells = tuple("x" if matrix.value(interaction.ordinal, t) else "" for t in matrix.threats)
        return (source, flow, destination) + cells

    header = ("Source", "Flow", "Destination") + matrix.threats
    body = [display_row(i) for i in rows]
    totals_row = (total_label, "", "") + tuple(str(totals[t]) for t in matrix.threats)

    if fmt is ReportFormat.CSV:
        return _csv_text(header, body + [totals_row])
    if fmt is ReportFormat.JSON:
        payload: dict = {"model": model.name}
        if scope is not None:
            payload["scope"] = scope
        payload["threats"] = list(matrix.threats)
        payload["rows"] = [
            {
                "source": i.source,
                "flow": i.flow,
                "destination": i.destination,
                "marks": [t for t in matrix.threats if matrix.value(i.ordinal, t)],
            }
            for i in rows
        ]
        payload["totals"] = {t: totals[t] for t in matrix.threats}
        return _json_text(payload)

    lines = [f"Model: {model.name}"]
    if scope is not None:
        lines.append(f"Scope: {scope}")
    lines.append("")
    lines.extend(_markdown_table(header, body + [totals_row]))
    return "\n".join(lines) + "\n"


_DIFF_COLUMNS = ("Threat", "Tn before", "Tn after", "Removed",
                 "PIA before", "PIA after", "Band before", "Band after", "Changed")


def _diff_cells(report: DiffReport, yes: str, no: str) -> list[tuple[str, ...]]:
    return [
        (row.threat, str(row.occurrences_before), str(row.occurrences_after),
         str(row.removed), row.risk_before_display, row.risk_after_display,
         row.band_before, row.band_after, yes if row.changed else no)
        for row in report.rows
    ]


def render_diff(report: DiffReport, fmt: ReportFormat = ReportFormat.MARKDOWN) -> str:
    """Before/after columns per threat plus a summary of band transitions."""
    if fmt is ReportFormat.CSV:
        return _csv_text(_DIFF_COLUMNS, _diff_cells(report, "yes", "no"))
    if fmt is ReportFormat.JSON:
        payload = {
            "model": report.model_name,
            "ti": report.total_interactions,
            "baseline_scenario": report.baseline_scenario,
            "scenario": report.mitigated_scenario,
            "cleared_scopes": list(report.cleared_scopes),
            "rows": [
                {
                    "threat": row.threat,
                    "tn_before": row.occurrences_before,
                    "tn_after": row.occurrences_after,
                    "removed": row.removed,
                    "pia_before": _ratio_json(row.risk_before, row.risk_before_display),
                    "pia_after": _ratio_json(row.risk_after, row.risk_after_display),
                    "band_before": row.band_before,
                    "band_after": row.band_after,
                    "changed": row.changed,
                }
                for row in report.rows
            ],
            "transitions": [
                {"threat": row.threat, "from": row.band_before, "to": row.band_after}
                for row in report.transitions
            ],
        }
        return _json_text(payload)

    lines = [f"Model: {report.model_name}"]
    if report.mitigated_scenario is not None:
        lines.append(f"Scenario: {report.mitigated_scenario}")
    if report.cleared_scopes:
        lines.append(f"Cleared scopes: {', '.join(report.cleared_scopes)}")
    lines.append("")
    lines.extend(_markdown_table(_DIFF_COLUMNS, _diff_cells(report, "yes", "")))
    lines.append("")
    lines.append("Transitions:")
    for row in report.transitions:
        lines.append(f"- {row.threat}: {row.band_before} -> {row.band_after}")
    return "\n".join(lines) + "\n"
