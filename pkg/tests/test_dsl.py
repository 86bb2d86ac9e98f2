import random

from hypothesis import given, strategies as st

from helpers import random_document
from tmac.catalog import Catalog, PetScenario
from tmac.dsl import Document, parse, render
from tmac.elicitation import And, GroupTest, Not, Or, RuleSet
from tmac.model import ElementKind, MarkEffect, Model

MINIMAL = 'model "m" { element u kind=entity\n flow f from=u to=u }'


def parse_ok(text):
    result = parse(text)
    assert result.ok, result.diagnostics
    return result.document


def test_minimal_model_parses():
    document = parse_ok(MINIMAL)
    (model,) = document.items
    assert isinstance(model, Model)
    assert len(model.elements) == 1 and len(model.flows) == 1
    assert model.elements[0].kind is ElementKind.EXTERNAL_ENTITY


def test_empty_string_parses_to_empty_document():
    document = parse_ok("")
    assert document.items == ()


def test_misspelled_attribute_reports_position():
    text = 'model "m" { element u kinde=entity }'
    result = parse(text)
    assert not result.ok
    assert len(result.diagnostics) >= 1
    diag = result.diagnostics[0]
    assert "kinde" in diag.message
    assert diag.line == 1
    assert diag.column == text.index("kinde") + 1


def test_parse_never_raises_on_junk():
    for text in ("}{", "model", 'model "x"', "éé ±±", "\x00", "# only a comment"):
        parse(text)


def test_comments_and_whitespace_do_not_affect_structure():
    noisy = 'model   "m"   {  # header\n\n  element u kind=entity # trailing\n\n  flow f from=u to=u\n}\n'
    assert parse_ok(noisy) == parse_ok(MINIMAL)


def test_render_of_minimal_model_round_trips():
    document = parse_ok(MINIMAL)
    rendered = render(document)
    assert rendered.splitlines()[0] == 'model "m" {'
    assert parse_ok(rendered) == document


def test_render_of_empty_document_is_empty_string():
    assert render(Document(())) == ""


def test_render_is_a_fixpoint_on_reference_files(reference_paths):
    for path in reference_paths:
        document = parse_ok(path.read_text(encoding="utf-8"))
        once = render(document)
        assert parse_ok(once) == document
        assert render(parse_ok(once)) == once


def test_string_escapes_round_trip():
    text = 'model "a \\"quoted\\" name \\\\ here" { }'
    document = parse_ok(text)
    assert document.items[0].name == 'a "quoted" name \\ here'
    assert parse_ok(render(document)) == document


def test_mark_statement_expands_and_regroups():
    text = 'model "m" { element a kind=process\n flow f from=a to=a\n mark f threats=[T1, T2] }'
    document = parse_ok(text)
    model = document.items[0]
    assert [(m.flow, m.threat, m.effect) for m in model.explicit_marks] == [
        ("f", "T1", MarkEffect.INCLUDE), ("f", "T2", MarkEffect.INCLUDE)]
    assert "mark f threats=[T1, T2]" in render(document)
    assert parse_ok(render(document)) == document


def test_unmark_statement_parses():
    text = 'model "m" { element a kind=process\n flow f from=a to=a\n unmark f threats=[T1] }'
    model = parse_ok(text).items[0]
    assert model.explicit_marks[0].effect is MarkEffect.EXCLUDE


def test_duplicate_model_block_is_a_diagnostic():
    result = parse('model "a" { }\nmodel "b" { }')
    assert not result.ok
    assert any("duplicate model block" in d.message for d in result.diagnostics)


def test_duplicate_catalog_block_is_a_diagnostic():
    result = parse("catalog { }\ncatalog { }")
    assert not result.ok
    assert any("duplicate catalog block" in d.message for d in result.diagnostics)


def test_multiple_rules_and_scenario_blocks_allowed():
    text = ('rules { rule T1 when source.kind == entity }\n'
            'rules { rule T2 when dest.tags has user }\n'
            'scenario "a" { clears=[s1] }\n'
            'scenario "b" { clears=[s2] threats=[T1] pets=["masking"] }')
    document = parse_ok(text)
    kinds = [type(item) for item in document.items]
    assert kinds == [RuleSet, RuleSet, PetScenario, PetScenario]
    assert document.items[3].threat_filter == ("T1",)
    assert parse_ok(render(document)) == document


def test_catalog_block_parses_threats():
    text = ('catalog {\n'
            '  threat T1 name="one" i=2 aggravates=[T2] misactors=[skilled-insider] assets=["a b"]\n'
            '  threat T2 name="two"\n'
            '}')
    (catalog,) = parse_ok(text).items
    assert isinstance(catalog, Catalog)
    assert catalog.threats[0].initial_consequence == 2
    assert catalog.threats[1].initial_consequence == 1
    assert catalog.threats[0].aggravates == ("T2",)


def test_unknown_misactor_is_a_parse_error():
    result = parse('catalog { threat T1 name="x" misactors=[mastermind] }')
    assert not result.ok
    assert any("mastermind" in d.message for d in result.diagnostics)


def test_expression_precedence_and_parentheses():
    text = ('rules { rule T1 when source.kind == entity or dest.kind == store '
            'and not in group g }')
    (ruleset,) = parse_ok(text).items
    predicate = ruleset.rules[0].predicate
    assert isinstance(predicate, Or)
    assert isinstance(predicate.terms[1], And)
    assert isinstance(predicate.terms[1].terms[1], Not)

    grouped = parse_ok('rules { rule T1 when (source.kind == entity or dest.kind == store) '
                       'and not in group g }')
    predicate2 = grouped.items[0].rules[0].predicate
    assert isinstance(predicate2, And)
    assert isinstance(predicate2.terms[0], Or)
    assert parse_ok(render(grouped)) == grouped


def test_nested_not_requires_parentheses():
    document = parse_ok('rules { rule T1 when not (not in group g) }')
    predicate = document.items[0].rules[0].predicate
    assert isinstance(predicate, Not) and isinstance(predicate.term, Not)
    assert isinstance(predicate.term.term, GroupTest)
    assert parse_ok(render(document)) == document


def test_type_mismatches_are_parse_errors():
    bad = (
        'rules { rule T1 when flow.kind == entity }',      # flow has no kind
        'rules { rule T1 when source.payload has x }',     # elements have no payload
        'rules { rule T1 when source.tags == user }',      # tags needs has
        'rules { rule T1 when source.kind has entity }',   # kind needs ==
    )
    for text in bad:
        result = parse(text)
        assert not result.ok, text
        assert any("not valid" in d.message for d in result.diagnostics), text


def test_diagnostics_sorted_by_position():
    result = parse('model "m" {\n element u kinde=entity\n element v kindx=process\n}')
    assert not result.ok
    positions = [(d.line, d.column) for d in result.diagnostics]
    assert positions == sorted(positions)
    assert len(result.diagnostics) >= 2


def test_unterminated_string_is_an_error():
    result = parse('model "m { }')
    assert not result.ok
    assert any("unterminated string" in d.message for d in result.diagnostics)


def test_invalid_escape_is_an_error():
    result = parse('model "a\\n" { }')
    assert not result.ok
    assert any("invalid escape" in d.message for d in result.diagnostics)


def test_unexpected_character_is_an_error():
    result = parse('model "m" { element u kind=entity; }')
    assert not result.ok
    assert any("unexpected character ';'" in d.message for d in result.diagnostics)


def test_unclosed_block_is_an_error():
    result = parse('model "m" { element u kind=entity')
    assert not result.ok
    assert any("unclosed model block" in d.message for d in result.diagnostics)


@given(st.integers(0, 100_000))
def test_random_documents_round_trip(seed):
    document = random_document(random.Random(seed))
    rendered = render(document)
    reparsed = parse(rendered)
    assert reparsed.ok, (rendered, reparsed.diagnostics)
    assert reparsed.document == document
    assert render(reparsed.document) == rendered


@given(st.text(max_size=200))
def test_parse_is_total_on_arbitrary_text(text):
    result = parse(text)
    if not result.ok:
        assert result.diagnostics
