"""Shared test utilities: seeded random input generators and brute-force
oracles that recompute everything cell by cell, independently of the engine."""

from __future__ import annotations

from decimal import ROUND_HALF_UP, Decimal, localcontext
from fractions import Fraction

from tmac.catalog import Catalog, PetScenario, Threat
from tmac.dsl import Document
from tmac.elicitation import (
    And,
    Comparison,
    FieldName,
    FieldTest,
    GroupTest,
    Not,
    Or,
    Rule,
    RuleSet,
    Selector,
)
from tmac.model import (
    LAYERS,
    Element,
    ElementKind,
    ExplicitMark,
    Flow,
    MarkEffect,
    Model,
    Scope,
)

THREAT_IDS = tuple(f"T{k}" for k in range(1, 12))
KINDS = (ElementKind.EXTERNAL_ENTITY, ElementKind.PROCESS, ElementKind.DATA_STORE)
TAG_POOL = ("user", "device", "third-party", "user-data", "device-data", "credential")


# ---------------------------------------------------------------------------
# Random generators (driven by a caller-provided random.Random)

def random_catalog(rng, max_threats=6) -> Catalog:
    count = rng.randint(1, max_threats)
    ids = [f"T{k}" for k in range(1, count + 1)]
    threats = []
    for tid in ids:
        others = [x for x in ids if x != tid]
        rng.shuffle(others)
        aggravates = tuple(others[: rng.randint(0, len(others))])
        threats.append(Threat(id=tid, name=f"threat {tid}",
                              initial_consequence=rng.randint(0, 3),
                              aggravates=aggravates))
    return Catalog(tuple(threats))


def random_model(rng, catalog: Catalog, max_flows=12, allow_excludes=True) -> Model:
    elements = []
    for k in range(rng.randint(2, 6)):
        tags = tuple(sorted(rng.sample(TAG_POOL, rng.randint(0, 3))))
        layer = rng.choice((None,) + LAYERS)
        elements.append(Element(id=f"e{k}", kind=rng.choice(KINDS), tags=tags, layer=layer))

    flows = []
    for k in range(rng.randint(1, max_flows)):
        payload = tuple(sorted(rng.sample(TAG_POOL, rng.randint(0, 2))))
        flows.append(Flow(id=f"f{k}", source=rng.choice(elements).id,
                          destination=rng.choice(elements).id, payload=payload))
    flow_ids = [f.id for f in flows]

    # Scopes always form a disjoint partition of the flows.
    shuffled = flow_ids[:]
    rng.shuffle(shuffled)
    scope_count = rng.randint(1, min(4, len(shuffled)))
    bounds = sorted(rng.sample(range(1, len(shuffled)), scope_count - 1)) if scope_count > 1 else []
    scopes = []
    start = 0
    for index, end in enumerate(bounds + [len(shuffled)]):
        scopes.append(Scope(name=f"s{index}", members=tuple(shuffled[start:end])))
        start = end

    marks = []
    for flow_id in flow_ids:
        for threat_id in catalog.threat_ids:
            roll = rng.random()
            if roll < 0.30:
                marks.append(ExplicitMark(flow_id, threat_id, MarkEffect.INCLUDE))
            elif allow_excludes and roll < 0.38:
                marks.append(ExplicitMark(flow_id, threat_id, MarkEffect.EXCLUDE))

    return Model(name="random model", elements=tuple(elements), flows=tuple(flows),
                 scopes=tuple(scopes), explicit_marks=tuple(marks))


def random_scenario(rng, model: Model, catalog: Catalog, name="pet") -> PetScenario:
    scope_names = [s.name for s in model.scopes]
    chosen = rng.sample(scope_names, rng.randint(1, len(scope_names)))
    threat_filter = None
    if rng.random() < 0.4:
        ids = list(catalog.threat_ids)
        threat_filter = tuple(rng.sample(ids, rng.randint(1, len(ids))))
    return PetScenario(name=name, clears=tuple(chosen), threat_filter=threat_filter)


def random_expr(rng, model: Model, depth=0):
    if depth >= 2 or rng.random() < 0.55:
        which = rng.randrange(4)
        if which == 0 and model.scopes:
            return GroupTest(rng.choice([s.name for s in model.scopes]))
        if which == 1:
            sel = rng.choice((Selector.SOURCE, Selector.DEST))
            return FieldTest(sel, FieldName.KIND, Comparison.EQ,
                             rng.choice(("entity", "process", "store")))
        if which == 2:
            sel = rng.choice((Selector.SOURCE, Selector.DEST))
            return FieldTest(sel, FieldName.TAGS, Comparison.HAS, rng.choice(TAG_POOL))
        if rng.random() < 0.5:
            sel = rng.choice((Selector.SOURCE, Selector.DEST))
            return FieldTest(sel, FieldName.LAYER, Comparison.EQ, rng.choice(LAYERS))
        return FieldTest(Selector.FLOW, FieldName.PAYLOAD, Comparison.HAS, rng.choice(TAG_POOL))
    roll = rng.random()
    if roll < 0.40:
        return Or(tuple(random_expr(rng, model, depth + 1) for _ in range(rng.randint(2, 3))))
    if roll < 0.80:
        return And(tuple(random_expr(rng, model, depth + 1) for _ in range(rng.randint(2, 3))))
    return Not(random_expr(rng, model, depth + 1))


def random_ruleset(rng, model: Model, catalog: Catalog) -> RuleSet:
    rules = tuple(
        Rule(threat=rng.choice(catalog.threat_ids), predicate=random_expr(rng, model))
        for _ in range(rng.randint(0, 3))
    )
    return RuleSet(rules)


def random_document(rng) -> Document:
    catalog = random_catalog(rng)
    model = random_model(rng, catalog)
    items: list = [model, catalog]
    ruleset = random_ruleset(rng, model, catalog)
    if ruleset.rules:
        items.append(ruleset)
    for k in range(rng.randint(0, 2)):
        items.append(random_scenario(rng, model, catalog, name=f"scenario {k}"))
    return Document(items=tuple(items))


# ---------------------------------------------------------------------------
# Brute-force oracles

def oracle_count(matrix, threat_id, member_flows=None) -> int:
    total = 0
    for interaction in matrix.interactions:
        if member_flows is not None and interaction.flow not in member_flows:
            continue
        if matrix.value(interaction.ordinal, threat_id):
            total += 1
    return total


def oracle_band(value: Fraction, config) -> str:
    for lower, upper, label in config.intervals():
        if lower <= value and (upper is None or value < upper):
            return label
    raise AssertionError(f"no band for {value}")


def oracle_display(value: Fraction, places: int) -> str:
    with localcontext() as ctx:
        ctx.prec = 60
        quantum = Decimal(1).scaleb(-places)
        result = (Decimal(value.numerator) / Decimal(value.denominator)).quantize(
            quantum, rounding=ROUND_HALF_UP)
    return f"{result:.{places}f}"


def oracle_assessment(matrix, catalog, config, member_flows=None) -> dict[str, dict]:
    """Recompute every row from first principles with exact ratios."""
    ti = len(matrix.interactions)
    rows = {}
    for threat in catalog.threats:
        tn = oracle_count(matrix, threat.id, member_flows)
        impact = threat.initial_consequence + len(threat.aggravates)
        like = Fraction(tn, ti)
        risk = like * impact
        rows[threat.id] = {
            "tn": tn,
            "c": impact,
            "l": like,
            "pia": risk,
            "l_display": oracle_display(like, 5),
            "pia_display": oracle_display(risk, 2),
            "band": oracle_band(risk, config),
        }
    return rows


def oracle_apply(matrix, scenario) -> dict[tuple[int, str], bool]:
    """Expected cell values after a scenario, computed cell by cell."""
    model = matrix.model
    covered: set[str] = set()
    for name in scenario.clears:
        covered |= set(model.scopes_by_name[name].members)
    threats = set(scenario.threat_filter) if scenario.threat_filter is not None else set(matrix.threats)
    expected = {}
    for interaction in matrix.interactions:
        for threat_id in matrix.threats:
            before = matrix.value(interaction.ordinal, threat_id)
            hit = interaction.flow in covered and threat_id in threats
            expected[(interaction.ordinal, threat_id)] = before and not hit
    return expected
