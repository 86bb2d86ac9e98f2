"""Data flow diagram model: domain types and structural validation.

A model describes a system as a DFD: external entities, processes, and data
stores joined by directed flows, plus named scopes (groups of flows) and
explicit threat marks consumed by the elicitation stage. Threats are elicited
per interaction, i.e. per source-flow-destination triple, so flows are
unidirectional and a request/response pair is two flows.

Everything here is immutable after construction and every operation is a pure
function, so values can be shared freely across threads.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from enum import Enum
from functools import cached_property

from .diagnostics import Diagnostic, error, has_errors, only_errors, sort_key, warning
from .errors import ModelValidationError, UnknownScopeError

# 1-based (line, column) of the declaration in the source text, when parsed.
Loc = tuple[int, int]

IDENT_RE = re.compile(r"[A-Za-z_][A-Za-z0-9_-]*\Z")

# Reference-model layers; optional metadata with no effect on scoring.
LAYERS = ("application", "event-processing", "aggregation", "device")


def is_identifier(text: str) -> bool:
    return bool(IDENT_RE.match(text))


class ElementKind(str, Enum):
    """DFD element taxonomy. Data flows are Flow values, not elements."""

    EXTERNAL_ENTITY = "external-entity"
    PROCESS = "process"
    DATA_STORE = "data-store"

    @property
    def keyword(self) -> str:
        """Token used by the text format and by rule predicates."""
        return _KIND_KEYWORD[self]


_KIND_KEYWORD = {
    ElementKind.EXTERNAL_ENTITY: "entity",
    ElementKind.PROCESS: "process",
    ElementKind.DATA_STORE: "store",
}

KIND_BY_KEYWORD = {kw: kind for kind, kw in _KIND_KEYWORD.items()}


@dataclass(frozen=True)
class Element:
    """A node of the DFD. ``tags`` is an ordered set of lowercase tokens."""

    id: str
    kind: ElementKind
    name: str = ""
    tags: tuple[str, ...] = ()
    layer: str | None = None
    loc: Loc | None = field(default=None, compare=False, repr=False)

    @property
    def display_name(self) -> str:
        return self.name or self.id


@dataclass(frozen=True)
class Flow:
    """A directed data flow between two declared elements."""

    id: str
    source: str
    destination: str
    label: str = ""
    payload: tuple[str, ...] = ()
    loc: Loc | None = field(default=None, compare=False, repr=False)

    @property
    def display_label(self) -> str:
        return self.label or self.id


@dataclass(frozen=True)
class Interaction:
    """A source-flow-destination triple, the unit threats are elicited at.

    Interactions correspond one-to-one with flows; ``ordinal`` is the flow's
    0-based declaration position.
    """

    source: str
    flow: str
    destination: str
    ordinal: int


@dataclass(frozen=True)
class Scope:
    """A named group of flows (e.g. one business process of the system)."""

    name: str
    members: tuple[str, ...]
    loc: Loc | None = field(default=None, compare=False, repr=False)


class MarkEffect(str, Enum):
    INCLUDE = "include"
    EXCLUDE = "exclude"


@dataclass(frozen=True)
class ExplicitMark:
    """An analyst-issued include/exclude of one threat on one flow."""

    flow: str
    threat: str
    effect: MarkEffect
    loc: Loc | None = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class Model:
    """A complete DFD plus scopes, explicit marks, and free-text notes."""

    name: str
    elements: tuple[Element, ...] = ()
    flows: tuple[Flow, ...] = ()
    scopes: tuple[Scope, ...] = ()
    explicit_marks: tuple[ExplicitMark, ...] = ()
    notes: tuple[str, ...] = ()
    loc: Loc | None = field(default=None, compare=False, repr=False)

    @cached_property
    def elements_by_id(self) -> dict[str, Element]:
        return {e.id: e for e in self.elements}

    @cached_property
    def flows_by_id(self) -> dict[str, Flow]:
        return {f.id: f for f in self.flows}

    @cached_property
    def scopes_by_name(self) -> dict[str, Scope]:
        return {s.name: s for s in self.scopes}


def _loc_args(value) -> tuple[int | None, int | None]:
    return value.loc if value.loc is not None else (None, None)


def validate_model(model: Model, *, dfd_style_check: bool = True) -> list[Diagnostic]:
    """Check every structural invariant of the model.

    Returns an empty list iff the model is well formed. Errors cover identifier
    grammar, duplicate ids, dangling references, and unknown layers. With
    ``dfd_style_check`` enabled (default), flows whose endpoints are both
    non-process elements get an advisory warning; some legitimate models (e.g.
    a store feeding an external auditor) violate that classic style rule, which
    is why it never escalates to an error.
    """
    diags: list[Diagnostic] = []

    element_ids: set[str] = set()
    for element in model.elements:
        line, col = _loc_args(element)
        if not is_identifier(element.id):
            diags.append(error(f"element id '{element.id}' is not a valid identifier", line, col))
        if element.id in element_ids:
            diags.append(error(f"duplicate element id '{element.id}'", line, col))
        element_ids.add(element.id)
        if element.layer is not None and element.layer not in LAYERS:
            diags.append(error(
                f"element '{element.id}' has unknown layer '{element.layer}' "
                f"(expected one of: {', '.join(LAYERS)})", line, col))
        for tag in element.tags:
            if tag != tag.lower():
                diags.append(error(f"tag '{tag}' on element '{element.id}' must be lowercase", line, col))

    flow_ids: set[str] = set()
    for flow in model.flows:
        line, col = _loc_args(flow)
        if not is_identifier(flow.id):
            diags.append(error(f"flow id '{flow.id}' is not a valid identifier", line, col))
        if flow.id in flow_ids:
            diags.append(error(f"duplicate flow id '{flow.id}'", line, col))
        flow_ids.add(flow.id)
        for endpoint in (flow.source, flow.destination):
            if endpoint not in element_ids:
                diags.append(error(f"flow '{flow.id}' references undeclared element '{endpoint}'", line, col))
        for tag in flow.payload:
            if tag != tag.lower():
                diags.append(error(f"payload tag '{tag}' on flow '{flow.id}' must be lowercase", line, col))

    scope_names: set[str] = set()
    for scope in model.scopes:
        line, col = _loc_args(scope)
        if not is_identifier(scope.name):
            diags.append(error(f"scope name '{scope.name}' is not a valid identifier", line, col))
        if scope.name in scope_names:
            diags.append(error(f"duplicate scope name '{scope.name}'", line, col))
        scope_names.add(scope.name)
        for member in scope.members:
            if member not in flow_ids:
                diags.append(error(f"scope '{scope.name}' references undeclared flow '{member}'", line, col))

    for mark in model.explicit_marks:
        line, col = _loc_args(mark)
        if mark.flow not in flow_ids:
            diags.append(error(f"{mark.effect.value} mark references undeclared flow '{mark.flow}'", line, col))

    if dfd_style_check:
        for flow in model.flows:
            src = model.elements_by_id.get(flow.source)
            dst = model.elements_by_id.get(flow.destination)
            if src is None or dst is None:
                continue
            if src.kind is not ElementKind.PROCESS and dst.kind is not ElementKind.PROCESS:
                line, col = _loc_args(flow)
                diags.append(warning(
                    f"flow '{flow.id}' connects two non-process elements "
                    f"('{src.id}' and '{dst.id}')", line, col))

    return sorted(diags, key=sort_key)


def enumerate_interactions(model: Model) -> tuple[Interaction, ...]:
    """One interaction per flow, in declaration order.

    Raises ModelValidationError when the model has validation errors.
    """
    errs = only_errors(validate_model(model, dfd_style_check=False))
    if errs:
        raise ModelValidationError(errs)
    return tuple(
        Interaction(flow.source, flow.id, flow.destination, ordinal)
        for ordinal, flow in enumerate(model.flows)
    )


def scope_members(model: Model, scope_name: str) -> tuple[Interaction, ...]:
    """Interactions whose flow belongs to the named scope, in declaration order."""
    scope = model.scopes_by_name.get(scope_name)
    if scope is None:
        raise UnknownScopeError(scope_name)
    members = set(scope.members)
    return tuple(i for i in enumerate_interactions(model) if i.flow in members)


def model_is_valid(model: Model) -> bool:
    return not has_errors(validate_model(model, dfd_style_check=False))
