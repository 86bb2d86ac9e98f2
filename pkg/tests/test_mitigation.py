import random
import warnings
from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from helpers import (
    THREAT_IDS,
    oracle_apply,
    random_catalog,
    random_model,
    random_scenario,
)
from tmac.catalog import PetScenario, default_catalog
from tmac.elicitation import elicit, occurrences
from tmac.errors import ReportMismatchError, ScenarioError
from tmac.mitigation import ScopeOverlapWarning, apply_scenario, diff
from tmac.model import Element, ElementKind, ExplicitMark, Flow, MarkEffect, Model, Scope
from tmac.risk import assess, parse_band_spec

RESIDUAL_TN = (0, 5, 1, 1, 1, 7, 0, 5, 1, 1, 3)
RESIDUAL_PIA = ("0.00", "0.43", "0.06", "0.06", "0.09", "0.60", "0.00", "0.71", "0.03", "0.09", "0.43")
RESIDUAL_BANDS = ("Low", "Low", "Low", "Low", "Low", "Moderate", "Low", "Moderate", "Low", "Low", "Low")
EXPECTED_TRANSITIONS = (
    ("T2", "Moderate", "Low"),
    ("T5", "Moderate", "Low"),
    ("T6", "High", "Moderate"),
    ("T7", "Moderate", "Low"),
    ("T8", "High", "Moderate"),
    ("T11", "High", "Low"),
)


@pytest.fixture(scope="module")
def mitigated_matrix(reference_matrix, reference_scenario):
    return apply_scenario(reference_matrix, reference_scenario)


@pytest.fixture(scope="module")
def mitigated_report(mitigated_matrix, reference_catalog):
    return assess(mitigated_matrix, reference_catalog)


def test_reference_scenario_residual_counts(mitigated_matrix):
    assert tuple(occurrences(mitigated_matrix, t) for t in THREAT_IDS) == RESIDUAL_TN


def test_element_identification_drops_to_zero(reference_matrix, mitigated_matrix):
    before = occurrences(reference_matrix, "T1")
    in_user = occurrences(reference_matrix, "T1", "user-access-management")
    in_device = occurrences(reference_matrix, "T1", "device-commissioning")
    assert (before, in_user, in_device) == (7, 1, 6)
    assert occurrences(mitigated_matrix, "T1") == before - (in_user + in_device) == 0


def test_mitigated_report_matches_expected_values(mitigated_report):
    rows = {row.threat: row for row in mitigated_report.rows}
    assert tuple(rows[t].risk_display for t in THREAT_IDS) == RESIDUAL_PIA
    assert tuple(rows[t].band for t in THREAT_IDS) == RESIDUAL_BANDS
    assert mitigated_report.scenario == "masking+e2ee"
    assert mitigated_report.cleared_scopes == ("user-access-management", "device-commissioning")


def test_consequence_untouched_by_scenario(baseline_report, mitigated_report):
    before = {r.threat: r.consequence for r in baseline_report.rows}
    after = {r.threat: r.consequence for r in mitigated_report.rows}
    assert before == after


def test_cleared_cells_record_the_scenario(reference_matrix, mitigated_matrix):
    cleared = [cell for cell in reference_matrix.marks if cell not in mitigated_matrix.marks]
    assert cleared
    for cell in cleared:
        assert mitigated_matrix.cleared_by(*cell) == ("masking+e2ee",)
    assert mitigated_matrix.value(*cleared[0]) is False


def test_clearing_an_empty_scope_changes_nothing(reference_matrix):
    model = reference_matrix.model
    from dataclasses import replace
    extended = replace(model, scopes=model.scopes + (Scope("empty", ()),))
    matrix = elicit(extended, reference_matrix.catalog, ())
    after = apply_scenario(matrix, PetScenario("noop", clears=("empty",)))
    assert after.marks == matrix.marks
    assert after.cleared == {}


def test_threat_filter_limits_clearing(reference_matrix):
    scenario = PetScenario("only-t11", clears=("device-commissioning",), threat_filter=("T11",))
    after = apply_scenario(reference_matrix, scenario)
    assert occurrences(after, "T11") == 13 - 7
    assert occurrences(after, "T1") == occurrences(reference_matrix, "T1")


def test_unknown_scope_or_threat_is_an_error(reference_matrix):
    with pytest.raises(ScenarioError, match="nowhere"):
        apply_scenario(reference_matrix, PetScenario("x", clears=("nowhere",)))
    with pytest.raises(ScenarioError, match="T99"):
        apply_scenario(reference_matrix, PetScenario("x", clears=("third-party-access",),
                                                     threat_filter=("T99",)))


def test_overlapping_scopes_warn_and_clear_once():
    model = Model(
        "overlap",
        elements=(Element("a", ElementKind.PROCESS), Element("b", ElementKind.PROCESS)),
        flows=(Flow("f0", "a", "b"), Flow("f1", "b", "a")),
        scopes=(Scope("s0", ("f0", "f1")), Scope("s1", ("f1",))),
        explicit_marks=(ExplicitMark("f0", "T1", MarkEffect.INCLUDE),
                        ExplicitMark("f1", "T1", MarkEffect.INCLUDE)),
    )
    catalog = default_catalog()
    matrix = elicit(model, catalog, ())
    with pytest.warns(ScopeOverlapWarning):
        after = apply_scenario(matrix, PetScenario("both", clears=("s0", "s1")))
    assert occurrences(after, "T1") == 0  # cleared once, never negative


def test_idempotence_and_commutativity_on_reference(reference_matrix, reference_scenario):
    once = apply_scenario(reference_matrix, reference_scenario)
    twice = apply_scenario(once, reference_scenario)
    assert once == twice

    other = PetScenario("xtra", clears=("third-party-access",), threat_filter=("T11",))
    ab = apply_scenario(apply_scenario(reference_matrix, reference_scenario), other)
    ba = apply_scenario(apply_scenario(reference_matrix, other), reference_scenario)
    assert ab == ba


def test_diff_lists_exactly_the_expected_transitions(baseline_report, mitigated_report):
    report = diff(baseline_report, mitigated_report)
    assert tuple((r.threat, r.band_before, r.band_after) for r in report.transitions) == EXPECTED_TRANSITIONS
    assert tuple(r.threat for r in report.rows) == THREAT_IDS
    for row in report.rows:
        assert row.removed == row.occurrences_before - row.occurrences_after >= 0


def test_diff_of_identical_reports_is_empty(baseline_report):
    report = diff(baseline_report, baseline_report)
    assert report.transitions == ()
    for row in report.rows:
        assert row.removed == 0 and not row.changed


def test_inventory_attack_risk_drop(baseline_report, mitigated_report):
    report = diff(baseline_report, mitigated_report)
    row = next(r for r in report.rows if r.threat == "T11")
    assert row.risk_before == Fraction(13, 7)
    assert row.risk_after == Fraction(3, 7)
    assert (row.risk_before_display, row.risk_after_display) == ("1.86", "0.43")
    assert (row.band_before, row.band_after) == ("High", "Low")


def test_incomparable_reports_are_rejected(reference_matrix, reference_catalog, baseline_report):
    other_bands = assess(reference_matrix, reference_catalog, parse_band_spec("all:0"))
    with pytest.raises(ReportMismatchError):
        diff(baseline_report, other_bands)

    scoped = assess(reference_matrix, reference_catalog, scope="user-access-management")
    with pytest.raises(ReportMismatchError):
        diff(baseline_report, scoped)

    rng = random.Random(0)
    catalog = random_catalog(rng, max_threats=2)
    model = random_model(rng, catalog, max_flows=3)
    foreign = assess(elicit(model, catalog, ()), catalog)
    with pytest.raises(ReportMismatchError):
        diff(baseline_report, foreign)


@given(st.integers(0, 10_000))
def test_apply_matches_cell_oracle(seed):
    rng = random.Random(seed)
    catalog = random_catalog(rng)
    model = random_model(rng, catalog)
    matrix = elicit(model, catalog, ())
    scenario = random_scenario(rng, model, catalog)
    expected = oracle_apply(matrix, scenario)
    after = apply_scenario(matrix, scenario)
    for cell, value in expected.items():
        assert after.value(*cell) == value


@pytest.mark.filterwarnings("ignore::tmac.risk.RiskCapWarning")
@given(st.integers(0, 10_000))
def test_scenarios_never_increase_counts_or_risk(seed):
    rng = random.Random(seed)
    catalog = random_catalog(rng)
    model = random_model(rng, catalog)
    matrix = elicit(model, catalog, ())
    scenario = random_scenario(rng, model, catalog)
    after = apply_scenario(matrix, scenario)
    for threat_id in matrix.threats:
        assert occurrences(after, threat_id) <= occurrences(matrix, threat_id)
        for scope in model.scopes:
            assert (occurrences(after, threat_id, scope.name)
                    <= occurrences(matrix, threat_id, scope.name))
    before_report = assess(matrix, catalog)
    after_report = assess(after, catalog)
    for threat_id in matrix.threats:
        assert after_report.row_for(threat_id).risk <= before_report.row_for(threat_id).risk
        assert after_report.row_for(threat_id).consequence == before_report.row_for(threat_id).consequence


@given(st.integers(0, 10_000))
def test_disjoint_clear_matches_subtraction_identity(seed):
    rng = random.Random(seed)
    catalog = random_catalog(rng)
    model = random_model(rng, catalog)
    matrix = elicit(model, catalog, ())
    scope_names = [s.name for s in model.scopes]
    chosen = tuple(rng.sample(scope_names, rng.randint(1, len(scope_names))))
    after = apply_scenario(matrix, PetScenario("disjoint", clears=chosen))
    for threat_id in matrix.threats:
        scoped_sum = sum(occurrences(matrix, threat_id, name) for name in chosen)
        assert occurrences(after, threat_id) == occurrences(matrix, threat_id) - scoped_sum


@given(st.integers(0, 10_000))
def test_idempotent_and_commutative(seed):
    rng = random.Random(seed)
    catalog = random_catalog(rng)
    model = random_model(rng, catalog)
    matrix = elicit(model, catalog, ())
    first = random_scenario(rng, model, catalog, name="s-a")
    second = random_scenario(rng, model, catalog, name="s-b")
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", ScopeOverlapWarning)
        once = apply_scenario(matrix, first)
        assert apply_scenario(once, first) == once
        ab = apply_scenario(apply_scenario(matrix, first), second)
        ba = apply_scenario(apply_scenario(matrix, second), first)
    assert ab == ba
