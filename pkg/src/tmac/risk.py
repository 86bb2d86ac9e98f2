"""Risk scoring: likelihood, PIA value, priority bands, and assessment reports.

All scoring arithmetic is exact rational arithmetic; floating point never
enters the pipeline. Decimal strings exist only at the display boundary and
use round-half-away-from-zero, likelihood at five decimals and PIA at two.
Band assignment always uses the exact value, never the display string.
"""

from __future__ import annotations

import re
import warnings
from dataclasses import dataclass
from fractions import Fraction

from .catalog import Catalog, consequence
from .elicitation import MarkingMatrix, occurrences
from .errors import AssessmentError


class RiskCapWarning(UserWarning):
    """A PIA value exceeded the configured display maximum."""


def round_half_away_from_zero(value: Fraction, places: int) -> int:
    """Round value * 10**places to the nearest integer, ties away from zero."""
    scaled = value * Fraction(10) ** places
    n, d = scaled.numerator, scaled.denominator
    units = (2 * abs(n) + d) // (2 * d)
    return units if n >= 0 else -units


def format_exact(value: Fraction, places: int) -> str:
    """Fixed-point decimal string of an exact ratio at the given precision."""
    units = round_half_away_from_zero(value, places)
    sign = "-" if units < 0 else ""
    whole, frac = divmod(abs(units), 10 ** places)
    if places == 0:
        return f"{sign}{whole}"
    return f"{sign}{whole}.{frac:0{places}d}"


@dataclass(frozen=True)
class Band:
    """One priority band; ``lower`` is the inclusive floor of its interval."""

    label: str
    lower: Fraction


@dataclass(frozen=True)
class BandConfig:
    """Contiguous, non-overlapping labeled intervals covering [0, +inf).

    The first band starts at 0 and each band runs up to (excluding) the next
    band's floor; the last band is unbounded. ``display_max`` caps the range
    the configuration is calibrated for; values above it still get the top
    label but trigger a RiskCapWarning.
    """

    bands: tuple[Band, ...]
    display_max: Fraction | None = None

    def __post_init__(self):
        if not self.bands:
            raise ValueError("band configuration needs at least one band")
        if self.bands[0].lower != 0:
            raise ValueError("first band must start at 0")
        labels = set()
        previous: Fraction | None = None
        for band in self.bands:
            if band.lower < 0:
                raise ValueError(f"band '{band.label}' has a negative floor")
            if previous is not None and band.lower <= previous:
                raise ValueError("band floors must be strictly increasing")
            if band.label in labels:
                raise ValueError(f"duplicate band label '{band.label}'")
            labels.add(band.label)
            previous = band.lower

    def intervals(self) -> tuple[tuple[Fraction, Fraction | None, str], ...]:
        """(lower inclusive, upper exclusive or None for +inf, label) triples."""
        out = []
        for index, band in enumerate(self.bands):
            upper = self.bands[index + 1].lower if index + 1 < len(self.bands) else None
            out.append((band.lower, upper, band.label))
        return tuple(out)

    def label_for(self, value: Fraction) -> str:
        if value < 0:
            raise AssessmentError("risk values are non-negative")
        chosen = self.bands[0]
        for band in self.bands:
            if band.lower <= value:
                chosen = band
        return chosen.label

    def rank(self, label: str) -> int:
        for index, band in enumerate(self.bands):
            if band.label == label:
                return index
        raise KeyError(label)

    def fingerprint(self) -> str:
        text = ";".join(f"{band.label}:{band.lower}" for band in self.bands)
        if self.display_max is not None:
            text += f";max={self.display_max}"
        return text


DEFAULT_BAND_CONFIG = BandConfig(
    bands=(
        Band("Low", Fraction(0)),
        Band("Moderate", Fraction(1, 2)),
        Band("High", Fraction(1)),
    ),
    display_max=Fraction(2),
)


def parse_band_spec(text: str) -> BandConfig:
    """Parse a ``label:lower,label:lower,...`` band override.

    Floors accept exact decimals ("0.5") or rationals ("1/2").
    """
    bands = []
    for part in text.split(","):
        label, sep, floor = part.partition(":")
        label, floor = label.strip(), floor.strip()
        if not sep or not label or not floor:
            raise ValueError(f"invalid band '{part.strip()}' (expected label:lower)")
        try:
            bands.append(Band(label, Fraction(floor)))
        except (ValueError, ZeroDivisionError) as exc:
            raise ValueError(f"invalid band floor '{floor}': {exc}") from None
    return BandConfig(tuple(bands), display_max=None)


def likelihood(occurrence_count: int, total_interactions: int) -> Fraction:
    """Exact occurrence ratio of a threat over the model's interactions."""
    if total_interactions <= 0:
        raise AssessmentError("cannot assess a model with zero interactions")
    if occurrence_count < 0:
        raise AssessmentError("occurrence count is negative")
    if occurrence_count > total_interactions:
        raise AssessmentError(
            f"occurrence count {occurrence_count} exceeds interaction count {total_interactions}")
    return Fraction(occurrence_count, total_interactions)


def pia(likelihood_value: Fraction, consequence_value: int) -> Fraction:
    """Privacy risk of a threat: likelihood times consequence, exactly."""
    if not 0 <= likelihood_value <= 1:
        raise AssessmentError("likelihood must lie in [0, 1]")
    if consequence_value < 0:
        raise AssessmentError("consequence is negative")
    return likelihood_value * consequence_value


def band_of(pia_value: Fraction, config: BandConfig = DEFAULT_BAND_CONFIG) -> str:
    """Label of the interval containing the exact (unrounded) PIA value."""
    label = config.label_for(pia_value)
    if config.display_max is not None and pia_value > config.display_max:
        warnings.warn(
            f"risk value {format_exact(pia_value, 2)} exceeds the configured "
            f"maximum {format_exact(config.display_max, 2)}",
            RiskCapWarning, stacklevel=2)
    return label


_TRAILING_INT = re.compile(r"(\d+)\Z")


def threat_sort_key(threat_id: str) -> tuple:
    """Ascending id order with numeric comparison of a trailing integer."""
    match = _TRAILING_INT.search(threat_id)
    if match:
        return (threat_id[: match.start()], 1, int(match.group(1)))
    return (threat_id, 0, 0)


@dataclass(frozen=True)
class ThreatAssessment:
    """One report row; the exact ratios are authoritative, displays derived."""

    threat: str
    catalog_index: int
    initial_consequence: int
    aggravation_count: int
    consequence: int
    occurrence_count: int
    likelihood: Fraction
    risk: Fraction
    likelihood_display: str
    risk_display: str
    band: str


@dataclass(frozen=True)
class AssessmentReport:
    """Assessment rows for one matrix, ordered by descending risk."""

    model_name: str
    total_interactions: int
    rows: tuple[ThreatAssessment, ...]
    band_fingerprint: str
    scenario: str | None = None
    cleared_scopes: tuple[str, ...] = ()
    scope: str | None = None

    def row_for(self, threat_id: str) -> ThreatAssessment:
        for row in self.rows:
            if row.threat == threat_id:
                return row
        raise KeyError(threat_id)


def _priority_key(row: ThreatAssessment) -> tuple:
    return (-row.risk, threat_sort_key(row.threat))


def assess(matrix: MarkingMatrix, catalog: Catalog,
           config: BandConfig = DEFAULT_BAND_CONFIG,
           scope: str | None = None) -> AssessmentReport:
    """Score every catalog threat against the matrix.

    With ``scope`` given, occurrence counts are restricted to that scope's
    interactions while the likelihood denominator stays the model total, so
    scoped rows sum to the unscoped ones over any partition of the flows.
    """
    if catalog.threat_ids != matrix.threats:
        raise AssessmentError("catalog does not match the matrix threat axis")
    total = len(matrix.interactions)
    if total == 0:
        raise AssessmentError("cannot assess a model with zero interactions")

    rows = []
    for index, threat in enumerate(catalog.threats):
        count = occurrences(matrix, threat.id, scope)
        impact = consequence(threat)
        ratio = likelihood(count, total)
        risk_value = pia(ratio, impact)
        rows.append(ThreatAssessment(
            threat=threat.id,
            catalog_index=index,
            initial_consequence=threat.initial_consequence,
            aggravation_count=len(threat.aggravates),
            consequence=impact,
            occurrence_count=count,
            likelihood=ratio,
            risk=risk_value,
            likelihood_display=format_exact(ratio, 5),
            risk_display=format_exact(risk_value, 2),
            band=band_of(risk_value, config),
        ))
    rows.sort(key=_priority_key)

    scenario = " + ".join(a.name for a in matrix.applied) or None
    cleared_scopes = tuple(dict.fromkeys(
        name for applied in matrix.applied for name in applied.cleared_scopes))
    return AssessmentReport(
        model_name=matrix.model.name,
        total_interactions=total,
        rows=tuple(rows),
        band_fingerprint=config.fingerprint(),
        scenario=scenario,
        cleared_scopes=cleared_scopes,
        scope=scope,
    )


def prioritize(report: AssessmentReport) -> list[ThreatAssessment]:
    """Rows by descending exact risk; ties broken by ascending threat id."""
    return sorted(report.rows, key=_priority_key)
