"""Threat catalog: threat definitions, aggravation graph, and PET scenarios.

A threat's consequence is its baseline impact plus the number of other threats
it can aggravate. Aggravation is a directed graph and may contain cycles
(profiling and tracking aggravate each other in the default catalog), so
nothing here ever walks it transitively; only the out-degree enters scoring.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from functools import cached_property

from .diagnostics import Diagnostic, error, sort_key
from .model import Loc, is_identifier


class MisactorKind(str, Enum):
    """Actor categories capable of realizing a threat."""

    UNSKILLED_INSIDER = "unskilled-insider"
    SKILLED_INSIDER = "skilled-insider"
    SKILLED_OUTSIDER = "skilled-outsider"
    SECURITY_AGENT = "security-agent"
    GOVERNMENT_AUTHORITY = "government-authority"
    SERVICE_PROVIDER = "service-provider"
    THIRD_PARTY_PROVIDER = "third-party-provider"
    CLOUD_PROVIDER = "cloud-provider"


MISACTOR_TOKENS = {m.value: m for m in MisactorKind}


@dataclass(frozen=True)
class Threat:
    """One catalog entry.

    ``initial_consequence`` is the baseline impact; ``aggravates`` lists the
    ids of other threats this one can trigger or worsen. Misactors and assets
    are report metadata only and never enter scoring.
    """

    id: str
    name: str
    initial_consequence: int = 1
    aggravates: tuple[str, ...] = ()
    misactors: tuple[MisactorKind, ...] = ()
    assets: tuple[str, ...] = ()
    description: str | None = None
    loc: Loc | None = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class Catalog:
    """Ordered threat collection; declaration order defines report row order."""

    threats: tuple[Threat, ...] = ()

    @cached_property
    def by_id(self) -> dict[str, Threat]:
        return {t.id: t for t in self.threats}

    @property
    def threat_ids(self) -> tuple[str, ...]:
        return tuple(t.id for t in self.threats)


@dataclass(frozen=True)
class PetScenario:
    """A what-if deployment of privacy-enhancing technologies.

    Applying the scenario clears every marking inside the named scopes,
    optionally restricted to the threats in ``threat_filter``. ``pets`` is
    descriptive metadata (e.g. data-masking, end-to-end-encryption); the
    engine models only the marking-clearing effect, not the mechanisms.
    """

    name: str
    clears: tuple[str, ...]
    threat_filter: tuple[str, ...] | None = None
    pets: tuple[str, ...] = ()
    loc: Loc | None = field(default=None, compare=False, repr=False)


def consequence(threat: Threat) -> int:
    """Baseline impact plus aggravation count; independent of any matrix."""
    return threat.initial_consequence + len(threat.aggravates)


def validate_catalog(catalog: Catalog) -> list[Diagnostic]:
    """Check id uniqueness, non-negative baselines, and aggravation references."""
    diags: list[Diagnostic] = []
    ids: set[str] = set()
    for threat in catalog.threats:
        line, col = threat.loc if threat.loc is not None else (None, None)
        if not is_identifier(threat.id):
            diags.append(error(f"threat id '{threat.id}' is not a valid identifier", line, col))
        if threat.id in ids:
            diags.append(error(f"duplicate threat id '{threat.id}'", line, col))
        ids.add(threat.id)
        if threat.initial_consequence < 0:
            diags.append(error(f"threat '{threat.id}' has negative baseline consequence", line, col))

    declared = {t.id for t in catalog.threats}
    for threat in catalog.threats:
        line, col = threat.loc if threat.loc is not None else (None, None)
        for ref in threat.aggravates:
            if ref == threat.id:
                diags.append(error(f"threat '{threat.id}' aggravates itself", line, col))
            elif ref not in declared:
                diags.append(error(f"threat '{threat.id}' aggravates undeclared threat '{ref}'", line, col))

    return sorted(diags, key=sort_key)


def _threat(id: str, name: str, aggravates: tuple[str, ...],
            misactors: tuple[MisactorKind, ...], assets: tuple[str, ...]) -> Threat:
    return Threat(id=id, name=name, initial_consequence=1, aggravates=aggravates,
                  misactors=misactors, assets=assets)


_M = MisactorKind

_DEFAULT_THREATS = (
    _threat("T1", "Identification of smart home element",
            ("T2",),
            (_M.SKILLED_INSIDER, _M.UNSKILLED_INSIDER),
            ("smart device data", "gateway data")),
    _threat("T2", "Identification of smart home user",
            ("T5", "T6"),
            (_M.SKILLED_INSIDER, _M.SKILLED_OUTSIDER),
            ("user pii", "login details")),
    _threat("T3", "Localization and tracking",
            ("T4",),
            (_M.SERVICE_PROVIDER, _M.CLOUD_PROVIDER, _M.SECURITY_AGENT, _M.GOVERNMENT_AUTHORITY),
            ("user location and activity", "device location and activity")),
    _threat("T4", "Profiling",
            ("T3",),
            (_M.SERVICE_PROVIDER, _M.CLOUD_PROVIDER, _M.SKILLED_OUTSIDER),
            ("user activity data",)),
    _threat("T5", "Impersonation",
            ("T1", "T2"),
            (_M.SKILLED_INSIDER, _M.SKILLED_OUTSIDER),
            ("user access credentials",)),
    _threat("T6", "Linkage of smart home user data",
            ("T2", "T4"),
            (_M.SKILLED_INSIDER, _M.SKILLED_OUTSIDER, _M.SERVICE_PROVIDER, _M.GOVERNMENT_AUTHORITY),
            ("user personal records",)),
    _threat("T7", "Linkage of smart home element data",
            ("T1", "T2"),
            (_M.SKILLED_INSIDER, _M.SKILLED_OUTSIDER, _M.SERVICE_PROVIDER, _M.GOVERNMENT_AUTHORITY),
            ("smart device data", "gateway data")),
    _threat("T8", "Data leakage",
            ("T1", "T2", "T6", "T7"),
            (_M.SKILLED_INSIDER, _M.SKILLED_OUTSIDER, _M.GOVERNMENT_AUTHORITY),
            ("smart device data", "gateway data", "user information")),
    _threat("T9", "Jurisdiction risk",
            (),
            (_M.SKILLED_INSIDER, _M.SKILLED_OUTSIDER, _M.SERVICE_PROVIDER),
            ("smart device data", "gateway data", "user information")),
    _threat("T10", "Life cycle transition",
            ("T2", "T7"),
            (_M.SKILLED_OUTSIDER,),
            ("smart device data", "gateway data", "user information")),
    _threat("T11", "Inventory attack",
            ("T1", "T2", "T3", "T4"),
            (_M.SKILLED_OUTSIDER, _M.SECURITY_AGENT, _M.GOVERNMENT_AUTHORITY),
            ("smart device data", "gateway data", "user information")),
)

_DEFAULT_CATALOG = Catalog(_DEFAULT_THREATS)


def default_catalog() -> Catalog:
    """The bundled eleven-threat smart home catalog.

    Consequence values over this catalog are (2, 3, 2, 2, 3, 3, 3, 5, 1, 3, 5)
    for T1..T11. The same data ships as reference/linddun-sh.tma.
    """
    return _DEFAULT_CATALOG
