"""Elicitation: build the interaction x threat marking matrix.

A cell (interaction, threat) is true when the threat can occur on that
interaction. Cells come from explicit analyst marks and/or predicate rules;
an explicit exclude dominates everything. Every true cell records where it
came from, so reports can explain each marking.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from types import MappingProxyType
from typing import Iterator, Mapping, Sequence

from .catalog import Catalog, validate_catalog
from .diagnostics import Diagnostic, error, only_errors, sort_key
from .errors import ElicitationError, UnknownScopeError, UnknownThreatError
from .model import (
    Interaction,
    Loc,
    MarkEffect,
    Model,
    enumerate_interactions,
)


class Selector(str, Enum):
    SOURCE = "source"
    DEST = "dest"
    FLOW = "flow"


class FieldName(str, Enum):
    KIND = "kind"
    LAYER = "layer"
    TAGS = "tags"
    PAYLOAD = "payload"


class Comparison(str, Enum):
    EQ = "=="
    HAS = "has"


@dataclass(frozen=True)
class FieldTest:
    """Test one attribute of the interaction, e.g. ``source.tags has user``."""

    selector: Selector
    field: FieldName
    op: Comparison
    value: str


@dataclass(frozen=True)
class GroupTest:
    """True iff the interaction's flow belongs to the named scope."""

    group: str


@dataclass(frozen=True)
class Not:
    term: "Expr"


@dataclass(frozen=True)
class And:
    terms: tuple["Expr", ...]


@dataclass(frozen=True)
class Or:
    terms: tuple["Expr", ...]


Expr = FieldTest | GroupTest | Not | And | Or

# Valid (selector, field) -> operator combinations; enforced by the parser and
# assumed here. source/dest address elements, flow addresses the flow payload.
VALID_TESTS = {
    (Selector.SOURCE, FieldName.KIND): Comparison.EQ,
    (Selector.SOURCE, FieldName.LAYER): Comparison.EQ,
    (Selector.SOURCE, FieldName.TAGS): Comparison.HAS,
    (Selector.DEST, FieldName.KIND): Comparison.EQ,
    (Selector.DEST, FieldName.LAYER): Comparison.EQ,
    (Selector.DEST, FieldName.TAGS): Comparison.HAS,
    (Selector.FLOW, FieldName.PAYLOAD): Comparison.HAS,
}


@dataclass(frozen=True)
class Rule:
    """Marks ``threat`` on every interaction where ``predicate`` holds."""

    threat: str
    predicate: Expr
    loc: Loc | None = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class RuleSet:
    """One ``rules { ... }`` block of a document."""

    rules: tuple[Rule, ...] = ()


def referenced_groups(expr: Expr) -> Iterator[str]:
    match expr:
        case GroupTest(group):
            yield group
        case Not(term):
            yield from referenced_groups(term)
        case And(terms) | Or(terms):
            for term in terms:
                yield from referenced_groups(term)


def evaluate_rule(rule: Rule, interaction: Interaction, model: Model) -> bool:
    """Evaluate the rule's predicate against one interaction of a valid model."""
    return _eval(rule.predicate, interaction, model)


def _eval(expr: Expr, interaction: Interaction, model: Model) -> bool:
    match expr:
        case Or(terms):
            return any(_eval(t, interaction, model) for t in terms)
        case And(terms):
            return all(_eval(t, interaction, model) for t in terms)
        case Not(term):
            return not _eval(term, interaction, model)
        case GroupTest(group):
            scope = model.scopes_by_name.get(group)
            if scope is None:
                raise UnknownScopeError(group)
            return interaction.flow in scope.members
        case FieldTest(selector, field_name, _, value):
            if selector is Selector.FLOW:
                flow = model.flows_by_id[interaction.flow]
                return value in flow.payload
            element_id = interaction.source if selector is Selector.SOURCE else interaction.destination
            element = model.elements_by_id[element_id]
            if field_name is FieldName.KIND:
                return element.kind.keyword == value
            if field_name is FieldName.LAYER:
                return element.layer == value
            return value in element.tags
    raise TypeError(f"unsupported expression node {expr!r}")


@dataclass(frozen=True)
class Provenance:
    """Why a cell is true: an explicit mark, or the rule that fired."""

    kind: str  # "explicit" or "rule"
    threat: str | None = None
    rule_ordinal: int | None = None


EXPLICIT = Provenance("explicit")


@dataclass(frozen=True)
class AppliedScenario:
    """Record of one scenario application kept on the resulting matrix."""

    name: str
    cleared_scopes: tuple[str, ...]
    threat_filter: tuple[str, ...] | None = None


@dataclass(frozen=True)
class MarkingMatrix:
    """Immutable interaction x threat boolean matrix with provenance.

    ``marks`` holds only the true cells, keyed by (interaction ordinal,
    threat id). ``cleared`` maps cells that were true before a scenario
    cleared them to the sorted names of the scenarios covering them.
    """

    model: Model
    catalog: Catalog
    interactions: tuple[Interaction, ...]
    threats: tuple[str, ...]
    marks: Mapping[tuple[int, str], Provenance]
    cleared: Mapping[tuple[int, str], tuple[str, ...]] = field(
        default_factory=lambda: MappingProxyType({}))
    applied: tuple[AppliedScenario, ...] = ()

    def value(self, ordinal: int, threat_id: str) -> bool:
        return (ordinal, threat_id) in self.marks

    def provenance(self, ordinal: int, threat_id: str) -> Provenance | None:
        return self.marks.get((ordinal, threat_id))

    def cleared_by(self, ordinal: int, threat_id: str) -> tuple[str, ...]:
        return self.cleared.get((ordinal, threat_id), ())


def elicit(model: Model, catalog: Catalog, rules: Sequence[Rule] = ()) -> MarkingMatrix:
    """Build the marking matrix from explicit marks and predicate rules.

    Cell semantics: true iff (some rule for the threat matches the interaction
    OR the flow carries an explicit include) AND the flow carries no explicit
    exclude for that threat. Rules for the same threat combine by OR; adding a
    rule can only turn cells true. Raises ElicitationError when a rule or mark
    references an unknown threat or an undeclared group.
    """
    interactions = enumerate_interactions(model)

    catalog_errors = only_errors(validate_catalog(catalog))
    if catalog_errors:
        raise ElicitationError(catalog_errors)

    known_threats = set(catalog.threat_ids)
    diags: list[Diagnostic] = []
    for rule in rules:
        line, col = rule.loc if rule.loc is not None else (None, None)
        if rule.threat not in known_threats:
            diags.append(error(f"rule references unknown threat '{rule.threat}'", line, col))
        for group in referenced_groups(rule.predicate):
            if group not in model.scopes_by_name:
                diags.append(error(f"rule for '{rule.threat}' references undeclared group '{group}'", line, col))
    for mark in model.explicit_marks:
        if mark.threat not in known_threats:
            line, col = mark.loc if mark.loc is not None else (None, None)
            diags.append(error(f"{mark.effect.value} mark references unknown threat '{mark.threat}'", line, col))
    if diags:
        raise ElicitationError(sorted(diags, key=sort_key))

    includes = {(m.flow, m.threat) for m in model.explicit_marks if m.effect is MarkEffect.INCLUDE}
    excludes = {(m.flow, m.threat) for m in model.explicit_marks if m.effect is MarkEffect.EXCLUDE}

    rules_by_threat: dict[str, list[tuple[int, Rule]]] = {}
    for ordinal, rule in enumerate(rules):
        rules_by_threat.setdefault(rule.threat, []).append((ordinal, rule))

    marks: dict[tuple[int, str], Provenance] = {}
    for interaction in interactions:
        for threat_id in catalog.threat_ids:
            if (interaction.flow, threat_id) in excludes:
                continue
            if (interaction.flow, threat_id) in includes:
                marks[(interaction.ordinal, threat_id)] = EXPLICIT
                continue
            for rule_ordinal, rule in rules_by_threat.get(threat_id, ()):
                if evaluate_rule(rule, interaction, model):
                    marks[(interaction.ordinal, threat_id)] = Provenance("rule", threat_id, rule_ordinal)
                    break

    return MarkingMatrix(
        model=model,
        catalog=catalog,
        interactions=interactions,
        threats=catalog.threat_ids,
        marks=MappingProxyType(marks),
    )


def occurrences(matrix: MarkingMatrix, threat_id: str, scope: str | None = None) -> int:
    """Count true cells for a threat, over all interactions or one scope."""
    if threat_id not in matrix.threats:
        raise UnknownThreatError(threat_id)
    if scope is None:
        return sum(1 for i in matrix.interactions if matrix.value(i.ordinal, threat_id))
    declared = matrix.model.scopes_by_name.get(scope)
    if declared is None:
        raise UnknownScopeError(scope)
    members = set(declared.members)
    return sum(
        1 for i in matrix.interactions
        if i.flow in members and matrix.value(i.ordinal, threat_id)
    )
