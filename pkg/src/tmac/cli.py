"""Command-line interface.

Commands: validate, interactions, assess, what-if, diff, fmt. Inputs are one
or more .tma files merged into a single document; when no catalog block is
present the embedded default catalog is used. Exit codes: 0 success, 1
validation errors, 2 parse/merge errors, 3 usage errors. Reports go to
standard output (or --out); diagnostics and warnings go to standard error.
"""

from __future__ import annotations

import argparse
import sys
import warnings
from dataclasses import dataclass, replace
from pathlib import Path

from .catalog import Catalog, PetScenario, default_catalog, validate_catalog
from .diagnostics import Diagnostic, Severity, error, has_errors, sort_key
from .dsl import Document, parse, render
from .elicitation import Rule, RuleSet, elicit, referenced_groups
from .errors import EngineError
from .mitigation import apply_scenario, diff as diff_reports
from .model import Model, enumerate_interactions, scope_members, validate_model
from .report import FORMAT_ALIASES, render_assessment, render_diff, render_matrix
from .risk import DEFAULT_BAND_CONFIG, BandConfig, assess, parse_band_spec

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_PARSE = 2
EXIT_USAGE = 3


class _ArgumentParser(argparse.ArgumentParser):
    """argparse with the usage-error exit code this tool documents."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


@dataclass
class _Inputs:
    """Merged blocks of all input files, each paired with its file name."""

    documents: list[Document]
    model: Model | None
    model_source: str | None
    catalog: Catalog | None
    catalog_source: str | None
    located_rules: tuple[tuple[Rule, str], ...]
    located_scenarios: tuple[tuple[PetScenario, str], ...]

    @property
    def catalog_in_force(self) -> Catalog:
        return self.catalog if self.catalog is not None else default_catalog()

    @property
    def rules(self) -> tuple[Rule, ...]:
        return tuple(rule for rule, _ in self.located_rules)

    @property
    def scenarios(self) -> tuple[PetScenario, ...]:
        return tuple(scenario for scenario, _ in self.located_scenarios)


def _print_diagnostics(diags) -> None:
    for diag in diags:
        print(diag.render(), file=sys.stderr)


def _locate(diags, source: str | None) -> list[Diagnostic]:
    return [replace(d, source=source) for d in diags]


def _load_inputs(paths: list[str]) -> tuple[_Inputs | None, int]:
    texts: list[tuple[str, str]] = []
    for path in paths:
        try:
            texts.append((path, Path(path).read_text(encoding="utf-8-sig")))
        except OSError as exc:
            print(f"error: cannot read '{path}': {exc.strerror or exc}", file=sys.stderr)
            return None, EXIT_USAGE
        except UnicodeDecodeError:
            print(f"error: cannot read '{path}': not valid UTF-8", file=sys.stderr)
            return None, EXIT_USAGE

    documents: list[Document] = []
    failed = False
    for path, text in texts:
        result = parse(text, source_name=path)
        if result.document is None:
            _print_diagnostics(result.diagnostics)
            failed = True
        else:
            documents.append(result.document)
    if failed:
        return None, EXIT_PARSE

    models: list[tuple[Model, str]] = []
    catalogs: list[tuple[Catalog, str]] = []
    rules: list[tuple[Rule, str]] = []
    scenarios: list[tuple[PetScenario, str]] = []
    for document in documents:
        source = document.source_name
        for item in document.items:
            if isinstance(item, Model):
                models.append((item, source))
            elif isinstance(item, Catalog):
                catalogs.append((item, source))
            elif isinstance(item, RuleSet):
                rules.extend((rule, source) for rule in item.rules)
            elif isinstance(item, PetScenario):
                scenarios.append((item, source))
    if len(models) > 1:
        print("error: duplicate model block across inputs (at most one)", file=sys.stderr)
        return None, EXIT_PARSE
    if len(catalogs) > 1:
        print("error: duplicate catalog block across inputs (at most one)", file=sys.stderr)
        return None, EXIT_PARSE

    return _Inputs(
        documents=documents,
        model=models[0][0] if models else None,
        model_source=models[0][1] if models else None,
        catalog=catalogs[0][0] if catalogs else None,
        catalog_source=catalogs[0][1] if catalogs else None,
        located_rules=tuple(rules),
        located_scenarios=tuple(scenarios),
    ), EXIT_OK


def _cross_diagnostics(inputs: _Inputs) -> list[Diagnostic]:
    """Reference checks that span blocks: marks, rules, and scenarios."""
    diags: list[Diagnostic] = []
    catalog = inputs.catalog_in_force
    known_threats = set(catalog.threat_ids)
    model = inputs.model

    if model is not None:
        for mark in model.explicit_marks:
            if mark.threat not in known_threats:
                line, col = mark.loc or (None, None)
                diags.append(error(
                    f"{mark.effect.value} mark references unknown threat '{mark.threat}'",
                    line, col, inputs.model_source))

    for rule, source in inputs.located_rules:
        line, col = rule.loc or (None, None)
        if rule.threat not in known_threats:
            diags.append(error(f"rule references unknown threat '{rule.threat}'", line, col, source))
        if model is None:
            diags.append(error("rules block requires a model block", line, col, source))
        else:
            for group in referenced_groups(rule.predicate):
                if group not in model.scopes_by_name:
                    diags.append(error(
                        f"rule for '{rule.threat}' references undeclared group '{group}'",
                        line, col, source))

    for scenario, source in inputs.located_scenarios:
        line, col = scenario.loc or (None, None)
        if model is None:
            diags.append(error(f"scenario '{scenario.name}' requires a model block", line, col, source))
        else:
            for scope in scenario.clears:
                if scope not in model.scopes_by_name:
                    diags.append(error(
                        f"scenario '{scenario.name}' clears unknown scope '{scope}'", line, col, source))
        for threat_id in scenario.threat_filter or ():
            if threat_id not in known_threats:
                diags.append(error(
                    f"scenario '{scenario.name}' filters unknown threat '{threat_id}'", line, col, source))

    return diags


def _validate_inputs(inputs: _Inputs) -> list[Diagnostic]:
    diags: list[Diagnostic] = []
    if inputs.model is not None:
        diags.extend(_locate(validate_model(inputs.model), inputs.model_source))
    if inputs.catalog is not None:
        diags.extend(_locate(validate_catalog(inputs.catalog), inputs.catalog_source))
    diags.extend(_cross_diagnostics(inputs))
    return sorted(diags, key=lambda d: (d.source or "", *sort_key(d)))


def _require_valid(inputs: _Inputs) -> int:
    """Print diagnostics; return a nonzero exit code on validation errors."""
    diags = _validate_inputs(inputs)
    _print_diagnostics(diags)
    if has_errors(diags):
        return EXIT_VALIDATION
    return EXIT_OK


def _require_model(inputs: _Inputs) -> Model | None:
    if inputs.model is None:
        print("error: no model block in inputs", file=sys.stderr)
        return None
    return inputs.model


def _bands(args) -> BandConfig | None:
    if args.bands is None:
        return DEFAULT_BAND_CONFIG
    try:
        return parse_band_spec(args.bands)
    except ValueError as exc:
        print(f"error: --bands: {exc}", file=sys.stderr)
        return None


def _emit(text: str, out: str | None) -> None:
    if out is None:
        sys.stdout.write(text)
    else:
        with open(out, "w", encoding="utf-8", newline="\n") as handle:
            handle.write(text)


def _find_scenario(inputs: _Inputs, name: str) -> PetScenario | None:
    for scenario in inputs.scenarios:
        if scenario.name == name:
            return scenario
    return None


# ---------------------------------------------------------------------------
# Commands

def _cmd_validate(args) -> int:
    inputs, code = _load_inputs(args.files)
    if inputs is None:
        return code
    diags = _validate_inputs(inputs)
    _print_diagnostics(diags)
    if has_errors(diags):
        return EXIT_VALIDATION
    parts = []
    if inputs.model is not None:
        parts.append(f"model '{inputs.model.name}' ({len(inputs.model.flows)} interactions)")
    if inputs.catalog is not None:
        parts.append(f"catalog ({len(inputs.catalog.threats)} threats)")
    if inputs.rules:
        parts.append(f"{len(inputs.rules)} rule(s)")
    if inputs.scenarios:
        parts.append(f"{len(inputs.scenarios)} scenario(s)")
    warning_count = sum(1 for d in diags if d.severity is Severity.WARNING)
    summary = "; ".join(parts) if parts else "no blocks"
    print(f"ok: {summary}; {warning_count} warning(s)")
    return EXIT_OK


def _cmd_interactions(args) -> int:
    inputs, code = _load_inputs(args.files)
    if inputs is None:
        return code
    code = _require_valid(inputs)
    if code != EXIT_OK:
        return code
    model = _require_model(inputs)
    if model is None:
        return EXIT_VALIDATION

    if args.scope is not None and args.scope not in model.scopes_by_name:
        print(f"error: unknown scope '{args.scope}'", file=sys.stderr)
        return EXIT_USAGE

    if args.matrix:
        matrix = elicit(model, inputs.catalog_in_force, inputs.rules)
        _emit(render_matrix(matrix, FORMAT_ALIASES[args.format], scope=args.scope), args.out)
        return EXIT_OK

    rows = scope_members(model, args.scope) if args.scope else enumerate_interactions(model)
    lines = []
    for interaction in rows:
        source = model.elements_by_id[interaction.source].display_name
        flow = model.flows_by_id[interaction.flow].display_label
        destination = model.elements_by_id[interaction.destination].display_name
        lines.append(f"{interaction.ordinal:3d}  {source} -> {flow} -> {destination}")
    lines.append("")
    if args.scope:
        lines.append(f"Scope {args.scope}: {len(rows)} interactions")
    lines.append(f"Ti: {len(model.flows)}")
    _emit("\n".join(lines) + "\n", args.out)
    return EXIT_OK


def _assess_pipeline(args, *, need_scenario: bool):
    """Shared load/validate/elicit steps; returns (inputs, matrix, config, scenario) or an exit code."""
    inputs, code = _load_inputs(args.files)
    if inputs is None:
        return code
    code = _require_valid(inputs)
    if code != EXIT_OK:
        return code
    model = _require_model(inputs)
    if model is None:
        return EXIT_VALIDATION
    config = _bands(args)
    if config is None:
        return EXIT_USAGE
    scope = getattr(args, "scope", None)
    if scope is not None and scope not in model.scopes_by_name:
        print(f"error: unknown scope '{scope}'", file=sys.stderr)
        return EXIT_USAGE
    scenario = None
    if need_scenario:
        scenario = _find_scenario(inputs, args.scenario)
        if scenario is None:
            known = ", ".join(s.name for s in inputs.scenarios) or "none declared"
            print(f"error: unknown scenario '{args.scenario}' (known: {known})", file=sys.stderr)
            return EXIT_USAGE
    matrix = elicit(model, inputs.catalog_in_force, inputs.rules)
    return inputs, matrix, config, scenario


def _cmd_assess(args) -> int:
    result = _assess_pipeline(args, need_scenario=False)
    if isinstance(result, int):
        return result
    inputs, matrix, config, _ = result
    report = assess(matrix, inputs.catalog_in_force, config, scope=args.scope)
    _emit(render_assessment(report, FORMAT_ALIASES[args.format]), args.out)
    return EXIT_OK


def _cmd_what_if(args) -> int:
    result = _assess_pipeline(args, need_scenario=True)
    if isinstance(result, int):
        return result
    inputs, matrix, config, scenario = result
    catalog = inputs.catalog_in_force
    mitigated = apply_scenario(matrix, scenario)
    mitigated_report = assess(mitigated, catalog, config)
    fmt = FORMAT_ALIASES[args.format]
    text = render_assessment(mitigated_report, fmt)
    if args.diff:
        baseline_report = assess(matrix, catalog, config)
        text += "\n" + render_diff(diff_reports(baseline_report, mitigated_report), fmt)
    _emit(text, args.out)
    return EXIT_OK


def _cmd_diff(args) -> int:
    result = _assess_pipeline(args, need_scenario=True)
    if isinstance(result, int):
        return result
    inputs, matrix, config, scenario = result
    catalog = inputs.catalog_in_force
    baseline_report = assess(matrix, catalog, config)
    mitigated_report = assess(apply_scenario(matrix, scenario), catalog, config)
    _emit(render_diff(diff_reports(baseline_report, mitigated_report),
                      FORMAT_ALIASES[args.format]), args.out)
    return EXIT_OK


def _cmd_fmt(args) -> int:
    inputs, code = _load_inputs(args.files)
    if inputs is None:
        return code
    items = tuple(item for document in inputs.documents for item in document.items)
    _emit(render(Document(items=items, source_name="<merged>")), args.out)
    return EXIT_OK


# ---------------------------------------------------------------------------
# Argument parsing

def _add_common(sub, *, fmt=True, bands=True, out=True) -> None:
    sub.add_argument("files", nargs="+", metavar="FILE", help="input .tma file(s)")
    if fmt:
        sub.add_argument("--format", choices=("md", "csv", "json"), default="md",
                         help="output format (default: md)")
    if bands:
        sub.add_argument("--bands", metavar="SPEC",
                         help="band override as label:lower,... (e.g. low:0,moderate:0.5,high:1)")
    if out:
        sub.add_argument("--out", metavar="PATH", help="write output to PATH instead of stdout")


def build_parser() -> argparse.ArgumentParser:
    parser = _ArgumentParser(
        prog="tmac",
        description="Threat-modeling-as-code: validate DFD models, elicit privacy "
                    "threats, score risk exactly, and evaluate PET scenarios.",
    )
    subparsers = parser.add_subparsers(dest="command", required=True,
                                       parser_class=_ArgumentParser)

    sub = subparsers.add_parser("validate", help="check inputs and print diagnostics")
    _add_common(sub, fmt=False, bands=False, out=False)
    sub.set_defaults(handler=_cmd_validate)

    sub = subparsers.add_parser("interactions", help="list interactions or render the marking matrix")
    _add_common(sub, bands=False)
    sub.add_argument("--scope", metavar="NAME", help="restrict to one scope")
    sub.add_argument("--matrix", action="store_true", help="render the marking matrix")
    sub.set_defaults(handler=_cmd_interactions)

    sub = subparsers.add_parser("assess", help="print the baseline assessment")
    _add_common(sub)
    sub.add_argument("--scope", metavar="NAME", help="count occurrences within one scope only")
    sub.set_defaults(handler=_cmd_assess)

    sub = subparsers.add_parser("what-if", help="apply a scenario and print the mitigated assessment")
    _add_common(sub)
    sub.add_argument("--scenario", required=True, metavar="NAME", help="scenario to apply")
    sub.add_argument("--diff", action="store_true", help="also print the before/after diff")
    sub.set_defaults(handler=_cmd_what_if)

    sub = subparsers.add_parser("diff", help="print only the before/after diff for a scenario")
    _add_common(sub)
    sub.add_argument("--scenario", required=True, metavar="NAME", help="scenario to apply")
    sub.set_defaults(handler=_cmd_diff)

    sub = subparsers.add_parser("fmt", help="pretty-print inputs canonically")
    _add_common(sub, fmt=False, bands=False)
    sub.set_defaults(handler=_cmd_fmt)

    return parser


def _print_warning(message, category, filename, lineno, file=None, line=None):
    print(f"warning: {message}", file=sys.stderr)


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    with warnings.catch_warnings():
        warnings.simplefilter("always")
        warnings.showwarning = _print_warning
        try:
            return args.handler(args)
        except EngineError as exc:
            print(f"error: {exc}", file=sys.stderr)
            return EXIT_VALIDATION


if __name__ == "__main__":
    sys.exit(main())
