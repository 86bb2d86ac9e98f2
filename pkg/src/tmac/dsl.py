"""Parser and pretty-printer for the threat-model text format (.tma files).

One file may combine a model, a catalog, rule blocks, and scenario blocks.
Parsing is total: it never raises on bad input, it reports diagnostics with
1-based line/column positions. Comments (# to end of line) and whitespace
never affect the parsed structure.

Grammar (EBNF, terminals quoted):

    file      := item* ;
    item      := model | catalog | rules | scenario ;
    model     := "model" STRING "{" mstmt* "}" ;
    mstmt     := element | flow | group | mark | unmark | note ;
    element   := "element" IDENT "kind" "=" ("entity"|"process"|"store")
                 ["tags" "=" taglist] ["layer" "=" IDENT] ["name" "=" STRING] ;
    flow      := "flow" IDENT "from" "=" IDENT "to" "=" IDENT
                 ["label" "=" STRING] ["payload" "=" taglist] ;
    group     := "group" IDENT "{" IDENT ("," IDENT)* "}" ;
    mark      := "mark" IDENT "threats" "=" idlist ;      (* force-include *)
    unmark    := "unmark" IDENT "threats" "=" idlist ;    (* force-exclude *)
    note      := "note" STRING ;
    catalog   := "catalog" "{" threatdef* "}" ;
    threatdef := "threat" IDENT "name" "=" STRING ["i" "=" INT]
                 ["aggravates" "=" idlist] ["misactors" "=" idlist]
                 ["assets" "=" stringlist] ;
    rules     := "rules" "{" rule* "}" ;
    rule      := "rule" IDENT "when" expr ;
    expr      := orx ; orx := andx ("or" andx)* ; andx := notx ("and" notx)* ;
    notx      := ["not"] atom ; atom := "(" expr ")" | test ;
    test      := sel "." field cmp | "in" "group" IDENT ;
    sel       := "source" | "dest" | "flow" ;
    field     := "kind" | "layer" | "tags" | "payload" ;
    cmp       := "==" IDENT | "has" IDENT ;
    scenario  := "scenario" STRING "{" "clears" "=" idlist
                 ["threats" "=" idlist] ["pets" "=" stringlist] "}" ;
    idlist    := "[" IDENT ("," IDENT)* "]" ; taglist := idlist ;
    stringlist:= "[" STRING ("," STRING)* "]" ;
    IDENT     := [a-zA-Z_][a-zA-Z0-9_-]* ;  STRING := double-quoted, \\" escape ;
    INT       := [0-9]+ ;  comment := "#" to end-of-line ;

Attributes appear in the fixed order shown; ``==`` applies to kind/layer only
and ``has`` to tags/payload only (a mismatch is a parse error). At most one
model block and one catalog block are allowed per document.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .catalog import MISACTOR_TOKENS, Catalog, PetScenario, Threat
from .diagnostics import Diagnostic, error, sort_key
from .elicitation import (
    VALID_TESTS,
    And,
    Comparison,
    Expr,
    FieldName,
    FieldTest,
    GroupTest,
    Not,
    Or,
    Rule,
    RuleSet,
    Selector,
)
from .model import (
    KIND_BY_KEYWORD,
    Element,
    ExplicitMark,
    Flow,
    MarkEffect,
    Model,
    Scope,
)

DocumentItem = Model | Catalog | RuleSet | PetScenario


@dataclass(frozen=True)
class Document:
    """Ordered blocks of one source file (or of several merged files)."""

    items: tuple[DocumentItem, ...] = ()
    source_name: str = field(default="<input>", compare=False)


@dataclass(frozen=True)
class ParseResult:
    """Outcome of a parse: a document on success, diagnostics on failure."""

    document: Document | None
    diagnostics: tuple[Diagnostic, ...]

    @property
    def ok(self) -> bool:
        return self.document is not None


# ---------------------------------------------------------------------------
# Lexer

_WORD = "word"
_STRING = "string"
_INT = "int"
_PUNCT = "punct"
_EOF = "eof"

_PUNCT_CHARS = set("{}[](),=.")
_WORD_START = set("abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ_")
_WORD_CHARS = _WORD_START | set("0123456789-")


@dataclass(frozen=True)
class Token:
    kind: str
    text: str
    line: int
    column: int


def _describe(token: Token) -> str:
    if token.kind == _EOF:
        return "end of input"
    if token.kind == _STRING:
        return "string"
    return f"'{token.text}'"


def _lex(text: str, source: str) -> tuple[list[Token], list[Diagnostic]]:
    tokens: list[Token] = []
    diags: list[Diagnostic] = []
    i, line, col = 0, 1, 1
    n = len(text)
    while i < n:
        c = text[i]
        if c == "\n":
            i += 1
            line += 1
            col = 1
            continue
        if c in " \t\r":
            i += 1
            col += 1
            continue
        if c == "#":
            while i < n and text[i] != "\n":
                i += 1
                col += 1
            continue
        if c == '"':
            start_line, start_col = line, col
            i += 1
            col += 1
            value = []
            terminated = False
            while i < n:
                ch = text[i]
                if ch == "\n":
                    break
                if ch == '"':
                    i += 1
                    col += 1
                    terminated = True
                    break
                if ch == "\\":
                    if i + 1 < n and text[i + 1] in ('"', "\\"):
                        value.append(text[i + 1])
                        i += 2
                        col += 2
                        continue
                    diags.append(error(
                        f"invalid escape sequence '\\{text[i + 1] if i + 1 < n else ''}'",
                        line, col, source))
                    i += 1
                    col += 1
                    continue
                value.append(ch)
                i += 1
                col += 1
            if not terminated:
                diags.append(error("unterminated string", start_line, start_col, source))
            tokens.append(Token(_STRING, "".join(value), start_line, start_col))
            continue
        if c.isdigit():
            start_col = col
            j = i
            while j < n and text[j].isdigit():
                j += 1
            tokens.append(Token(_INT, text[i:j], line, start_col))
            col += j - i
            i = j
            continue
        if c in _WORD_START:
            start_col = col
            j = i
            while j < n and text[j] in _WORD_CHARS:
                j += 1
            tokens.append(Token(_WORD, text[i:j], line, start_col))
            col += j - i
            i = j
            continue
        if c == "=" and i + 1 < n and text[i + 1] == "=":
            tokens.append(Token(_PUNCT, "==", line, col))
            i += 2
            col += 2
            continue
        if c in _PUNCT_CHARS:
            tokens.append(Token(_PUNCT, c, line, col))
            i += 1
            col += 1
            continue
        diags.append(error(f"unexpected character '{c}'", line, col, source))
        i += 1
        col += 1
    tokens.append(Token(_EOF, "", line, col))
    return tokens, diags


# ---------------------------------------------------------------------------
# Parser

_TOP_WORDS = ("model", "catalog", "rules", "scenario")
_MODEL_STMT_WORDS = ("element", "flow", "group", "mark", "unmark", "note")
_SYNC_WORDS = set(_TOP_WORDS) | set(_MODEL_STMT_WORDS) | {"threat", "rule"}


class _SyntaxFail(Exception):
    """Internal control flow: a statement could not be parsed."""

    def __init__(self, diag: Diagnostic):
        self.diag = diag


def _dedupe(items) -> tuple:
    return tuple(dict.fromkeys(items))


class _Parser:
    def __init__(self, tokens: list[Token], source: str):
        self.tokens = tokens
        self.pos = 0
        self.source = source
        self.diags: list[Diagnostic] = []

    # -- token helpers ------------------------------------------------------

    def peek(self) -> Token:
        return self.tokens[self.pos]

    def advance(self) -> Token:
        token = self.tokens[self.pos]
        if token.kind != _EOF:
            self.pos += 1
        return token

    def at_word(self, text: str) -> bool:
        token = self.peek()
        return token.kind == _WORD and token.text == text

    def at_punct(self, text: str) -> bool:
        token = self.peek()
        return token.kind == _PUNCT and token.text == text

    def fail(self, message: str, token: Token | None = None) -> _SyntaxFail:
        token = token or self.peek()
        return _SyntaxFail(error(message, token.line, token.column, self.source))

    def expect_word(self, what: str) -> Token:
        token = self.peek()
        if token.kind != _WORD:
            raise self.fail(f"expected {what}, found {_describe(token)}")
        return self.advance()

    def expect_keyword(self, keyword: str) -> Token:
        token = self.peek()
        if token.kind != _WORD or token.text != keyword:
            raise self.fail(f"expected '{keyword}', found {_describe(token)}")
        return self.advance()

    def expect_punct(self, punct: str) -> Token:
        token = self.peek()
        if token.kind != _PUNCT or token.text != punct:
            raise self.fail(f"expected '{punct}', found {_describe(token)}")
        return self.advance()

    def expect_string(self, what: str) -> Token:
        token = self.peek()
        if token.kind != _STRING:
            raise self.fail(f"expected {what} (a quoted string), found {_describe(token)}")
        return self.advance()

    def expect_int(self, what: str) -> Token:
        token = self.peek()
        if token.kind != _INT:
            raise self.fail(f"expected {what} (an integer), found {_describe(token)}")
        return self.advance()

    def match_attribute(self, keyword: str) -> bool:
        """Consume ``keyword =`` when the next word is that attribute name."""
        if self.at_word(keyword):
            self.advance()
            self.expect_punct("=")
            return True
        return False

    # -- lists --------------------------------------------------------------

    def parse_idlist(self) -> list[Token]:
        self.expect_punct("[")
        items = [self.expect_word("an identifier")]
        while self.at_punct(","):
            self.advance()
            items.append(self.expect_word("an identifier"))
        self.expect_punct("]")
        return items

    def parse_stringlist(self) -> list[Token]:
        self.expect_punct("[")
        items = [self.expect_string("a string")]
        while self.at_punct(","):
            self.advance()
            items.append(self.expect_string("a string"))
        self.expect_punct("]")
        return items

    # -- recovery -----------------------------------------------------------

    def sync(self, *, top_level: bool) -> None:
        """Skip forward to the next plausible statement or block boundary."""
        while True:
            token = self.peek()
            if token.kind == _EOF:
                return
            if token.kind == _PUNCT and token.text == "}":
                return
            if token.kind == _WORD:
                words = _TOP_WORDS if top_level else _SYNC_WORDS
                if token.text in words:
                    return
            self.advance()

    # -- document -----------------------------------------------------------

    def parse_document(self) -> list[DocumentItem]:
        items: list[DocumentItem] = []
        model_seen = False
        catalog_seen = False
        while self.peek().kind != _EOF:
            token = self.peek()
            try:
                if self.at_word("model"):
                    if model_seen:
                        self.diags.append(error(
                            "duplicate model block (at most one per document)",
                            token.line, token.column, self.source))
                    model_seen = True
                    items.append(self.parse_model())
                elif self.at_word("catalog"):
                    if catalog_seen:
                        self.diags.append(error(
                            "duplicate catalog block (at most one per document)",
                            token.line, token.column, self.source))
                    catalog_seen = True
                    items.append(self.parse_catalog())
                elif self.at_word("rules"):
                    items.append(self.parse_rules())
                elif self.at_word("scenario"):
                    items.append(self.parse_scenario())
                else:
                    raise self.fail(
                        f"expected 'model', 'catalog', 'rules', or 'scenario', found {_describe(token)}")
            except _SyntaxFail as failure:
                self.diags.append(failure.diag)
                if self.peek() is token:
                    self.advance()
                self.sync(top_level=True)
        return items

    # -- model block --------------------------------------------------------

    def parse_model(self) -> Model:
        keyword = self.expect_keyword("model")
        name = self.expect_string("model name")
        self.expect_punct("{")
        elements: list[Element] = []
        flows: list[Flow] = []
        scopes: list[Scope] = []
        marks: list[ExplicitMark] = []
        notes: list[str] = []
        while not self.at_punct("}"):
            token = self.peek()
            if token.kind == _EOF:
                self.diags.append(error("unclosed model block", keyword.line, keyword.column, self.source))
                break
            try:
                if self.at_word("element"):
                    elements.append(self.parse_element())
                elif self.at_word("flow"):
                    flows.append(self.parse_flow())
                elif self.at_word("group"):
                    scopes.append(self.parse_group())
                elif self.at_word("mark"):
                    marks.extend(self.parse_mark(MarkEffect.INCLUDE))
                elif self.at_word("unmark"):
                    marks.extend(self.parse_mark(MarkEffect.EXCLUDE))
                elif self.at_word("note"):
                    self.advance()
                    notes.append(self.expect_string("note text").text)
                else:
                    raise self.fail(
                        "expected 'element', 'flow', 'group', 'mark', 'unmark', "
                        f"or 'note', found {_describe(token)}")
            except _SyntaxFail as failure:
                self.diags.append(failure.diag)
                if self.peek() is token:
                    self.advance()
                self.sync(top_level=False)
        if self.at_punct("}"):
            self.advance()
        return Model(
            name=name.text,
            elements=tuple(elements),
            flows=tuple(flows),
            scopes=tuple(scopes),
            explicit_marks=tuple(marks),
            notes=tuple(notes),
            loc=(keyword.line, keyword.column),
        )

    def parse_element(self) -> Element:
        keyword = self.advance()
        ident = self.expect_word("an element id")
        self.expect_keyword("kind")
        self.expect_punct("=")
        kind_token = self.expect_word("'entity', 'process', or 'store'")
        kind = KIND_BY_KEYWORD.get(kind_token.text)
        if kind is None:
            raise self.fail(
                f"expected 'entity', 'process', or 'store', found '{kind_token.text}'", kind_token)
        tags: tuple[str, ...] = ()
        layer = None
        name = ""
        if self.match_attribute("tags"):
            tags = _dedupe(t.text for t in self.parse_idlist())
        if self.match_attribute("layer"):
            layer = self.expect_word("a layer name").text
        if self.match_attribute("name"):
            name = self.expect_string("a display name").text
        return Element(id=ident.text, kind=kind, name=name, tags=tags, layer=layer,
                       loc=(keyword.line, keyword.column))

    def parse_flow(self) -> Flow:
        keyword = self.advance()
        ident = self.expect_word("a flow id")
        self.expect_keyword("from")
        self.expect_punct("=")
        source = self.expect_word("a source element id")
        self.expect_keyword("to")
        self.expect_punct("=")
        destination = self.expect_word("a destination element id")
        label = ""
        payload: tuple[str, ...] = ()
        if self.match_attribute("label"):
            label = self.expect_string("a flow label").text
        if self.match_attribute("payload"):
            payload = _dedupe(t.text for t in self.parse_idlist())
        return Flow(id=ident.text, source=source.text, destination=destination.text,
                    label=label, payload=payload, loc=(keyword.line, keyword.column))

    def parse_group(self) -> Scope:
        keyword = self.advance()
        name = self.expect_word("a group name")
        self.expect_punct("{")
        members = [self.expect_word("a flow id")]
        while self.at_punct(","):
            self.advance()
            members.append(self.expect_word("a flow id"))
        self.expect_punct("}")
        return Scope(name=name.text, members=_dedupe(t.text for t in members),
                     loc=(keyword.line, keyword.column))

    def parse_mark(self, effect: MarkEffect) -> list[ExplicitMark]:
        keyword = self.advance()
        flow = self.expect_word("a flow id")
        self.expect_keyword("threats")
        self.expect_punct("=")
        threats = self.parse_idlist()
        return [
            ExplicitMark(flow=flow.text, threat=t.text, effect=effect,
                         loc=(keyword.line, keyword.column))
            for t in threats
        ]

    # -- catalog block ------------------------------------------------------

    def parse_catalog(self) -> Catalog:
        keyword = self.expect_keyword("catalog")
        self.expect_punct("{")
        threats: list[Threat] = []
        while not self.at_punct("}"):
            token = self.peek()
            if token.kind == _EOF:
                self.diags.append(error("unclosed catalog block", keyword.line, keyword.column, self.source))
                break
            try:
                if self.at_word("threat"):
                    threats.append(self.parse_threat())
                else:
                    raise self.fail(f"expected 'threat', found {_describe(token)}")
            except _SyntaxFail as failure:
                self.diags.append(failure.diag)
                if self.peek() is token:
                    self.advance()
                self.sync(top_level=False)
        if self.at_punct("}"):
            self.advance()
        return Catalog(threats=tuple(threats))

    def parse_threat(self) -> Threat:
        keyword = self.advance()
        ident = self.expect_word("a threat id")
        self.expect_keyword("name")
        self.expect_punct("=")
        name = self.expect_string("a threat name")
        initial = 1
        aggravates: tuple[str, ...] = ()
        misactors = []
        assets: tuple[str, ...] = ()
        if self.match_attribute("i"):
            initial = int(self.expect_int("a baseline consequence").text)
        if self.match_attribute("aggravates"):
            aggravates = _dedupe(t.text for t in self.parse_idlist())
        if self.match_attribute("misactors"):
            for token in self.parse_idlist():
                kind = MISACTOR_TOKENS.get(token.text)
                if kind is None:
                    raise self.fail(
                        f"unknown misactor '{token.text}' (expected one of: "
                        f"{', '.join(sorted(MISACTOR_TOKENS))})", token)
                misactors.append(kind)
        if self.match_attribute("assets"):
            assets = tuple(t.text for t in self.parse_stringlist())
        return Threat(id=ident.text, name=name.text, initial_consequence=initial,
                      aggravates=aggravates, misactors=_dedupe(misactors), assets=assets,
                      loc=(keyword.line, keyword.column))

    # -- rules block --------------------------------------------------------

    def parse_rules(self) -> RuleSet:
        keyword = self.expect_keyword("rules")
        self.expect_punct("{")
        rules: list[Rule] = []
        while not self.at_punct("}"):
            token = self.peek()
            if token.kind == _EOF:
                self.diags.append(error("unclosed rules block", keyword.line, keyword.column, self.source))
                break
            try:
                if self.at_word("rule"):
                    rules.append(self.parse_rule())
                else:
                    raise self.fail(f"expected 'rule', found {_describe(token)}")
            except _SyntaxFail as failure:
                self.diags.append(failure.diag)
                if self.peek() is token:
                    self.advance()
                self.sync(top_level=False)
        if self.at_punct("}"):
            self.advance()
        return RuleSet(rules=tuple(rules))

    def parse_rule(self) -> Rule:
        keyword = self.advance()
        threat = self.expect_word("a threat id")
        self.expect_keyword("when")
        predicate = self.parse_expr()
        return Rule(threat=threat.text, predicate=predicate,
                    loc=(keyword.line, keyword.column))

    def parse_expr(self) -> Expr:
        terms = [self.parse_and()]
        while self.at_word("or"):
            self.advance()
            terms.append(self.parse_and())
        return terms[0] if len(terms) == 1 else Or(tuple(terms))

    def parse_and(self) -> Expr:
        terms = [self.parse_not()]
        while self.at_word("and"):
            self.advance()
            terms.append(self.parse_not())
        return terms[0] if len(terms) == 1 else And(tuple(terms))

    def parse_not(self) -> Expr:
        if self.at_word("not"):
            self.advance()
            return Not(self.parse_atom())
        return self.parse_atom()

    def parse_atom(self) -> Expr:
        if self.at_punct("("):
            self.advance()
            inner = self.parse_expr()
            self.expect_punct(")")
            return inner
        return self.parse_test()

    def parse_test(self) -> Expr:
        token = self.peek()
        if self.at_word("in"):
            self.advance()
            self.expect_keyword("group")
            group = self.expect_word("a group name")
            return GroupTest(group.text)
        if token.kind != _WORD or token.text not in ("source", "dest", "flow"):
            raise self.fail(
                f"expected a test ('source', 'dest', 'flow', 'in group', 'not', "
                f"or '('), found {_describe(token)}")
        selector = Selector(self.advance().text)
        self.expect_punct(".")
        field_token = self.expect_word("a field ('kind', 'layer', 'tags', or 'payload')")
        try:
            field_name = FieldName(field_token.text)
        except ValueError:
            raise self.fail(
                f"expected 'kind', 'layer', 'tags', or 'payload', found '{field_token.text}'",
                field_token) from None
        required = VALID_TESTS.get((selector, field_name))
        if required is None:
            raise self.fail(
                f"field '{field_name.value}' is not valid for selector '{selector.value}'",
                field_token)
        op_token = self.peek()
        if self.at_punct("=="):
            op = Comparison.EQ
            self.advance()
        elif self.at_word("has"):
            op = Comparison.HAS
            self.advance()
        else:
            raise self.fail(f"expected '==' or 'has', found {_describe(op_token)}")
        if op is not required:
            raise self.fail(
                f"operator '{op.value}' is not valid for field '{field_name.value}' "
                f"(use '{required.value}')", op_token)
        value = self.expect_word("a comparison value")
        return FieldTest(selector=selector, field=field_name, op=op, value=value.text)

    # -- scenario block -----------------------------------------------------

    def parse_scenario(self) -> PetScenario:
        keyword = self.expect_keyword("scenario")
        name = self.expect_string("a scenario name")
        self.expect_punct("{")
        self.expect_keyword("clears")
        self.expect_punct("=")
        clears = _dedupe(t.text for t in self.parse_idlist())
        threat_filter = None
        pets: tuple[str, ...] = ()
        if self.match_attribute("threats"):
            threat_filter = _dedupe(t.text for t in self.parse_idlist())
        if self.match_attribute("pets"):
            pets = tuple(t.text for t in self.parse_stringlist())
        self.expect_punct("}")
        return PetScenario(name=name.text, clears=clears, threat_filter=threat_filter,
                           pets=pets, loc=(keyword.line, keyword.column))


def parse(text: str, source_name: str = "<input>") -> ParseResult:
    """Parse one document. Never raises; failures come back as diagnostics."""
    tokens, lex_diags = _lex(text, source_name)
    parser = _Parser(tokens, source_name)
    try:
        items = parser.parse_document()
    except _SyntaxFail as failure:  # defensive; statement loops catch these
        parser.diags.append(failure.diag)
        items = []
    diagnostics = tuple(sorted(lex_diags + parser.diags, key=sort_key))
    if diagnostics:
        return ParseResult(document=None, diagnostics=diagnostics)
    return ParseResult(document=Document(items=tuple(items), source_name=source_name),
                       diagnostics=())


# ---------------------------------------------------------------------------
# Pretty-printer

def _quote(text: str) -> str:
    return '"' + text.replace("\\", "\\\\").replace('"', '\\"') + '"'


def _idlist(items) -> str:
    return "[" + ", ".join(items) + "]"


def _stringlist(items) -> str:
    return "[" + ", ".join(_quote(s) for s in items) + "]"


# Precedence levels for minimal parenthesization.
_LEVEL_OR, _LEVEL_AND, _LEVEL_NOT, _LEVEL_ATOM = 0, 1, 2, 3


def _expr_level(expr: Expr) -> int:
    if isinstance(expr, Or):
        return _LEVEL_OR
    if isinstance(expr, And):
        return _LEVEL_AND
    if isinstance(expr, Not):
        return _LEVEL_NOT
    return _LEVEL_ATOM


def _expr_text(expr: Expr, minimum: int = _LEVEL_OR) -> str:
    if isinstance(expr, Or):
        text = " or ".join(_expr_text(t, _LEVEL_AND) for t in expr.terms)
    elif isinstance(expr, And):
        text = " and ".join(_expr_text(t, _LEVEL_NOT) for t in expr.terms)
    elif isinstance(expr, Not):
        text = "not " + _expr_text(expr.term, _LEVEL_ATOM)
    elif isinstance(expr, GroupTest):
        text = f"in group {expr.group}"
    else:
        text = f"{expr.selector.value}.{expr.field.value} {expr.op.value} {expr.value}"
    if _expr_level(expr) < minimum:
        return f"({text})"
    return text


def _render_model(model: Model) -> list[str]:
    lines = [f"model {_quote(model.name)} {{"]
    for note in model.notes:
        lines.append(f"  note {_quote(note)}")
    for element in model.elements:
        stmt = f"  element {element.id} kind={element.kind.keyword}"
        if element.tags:
            stmt += f" tags={_idlist(element.tags)}"
        if element.layer is not None:
            stmt += f" layer={element.layer}"
        if element.name:
            stmt += f" name={_quote(element.name)}"
        lines.append(stmt)
    for flow in model.flows:
        stmt = f"  flow {flow.id} from={flow.source} to={flow.destination}"
        if flow.label:
            stmt += f" label={_quote(flow.label)}"
        if flow.payload:
            stmt += f" payload={_idlist(flow.payload)}"
        lines.append(stmt)
    for scope in model.scopes:
        lines.append(f"  group {scope.name} {{ {', '.join(scope.members)} }}")
    index = 0
    marks = model.explicit_marks
    while index < len(marks):
        first = marks[index]
        run = [first.threat]
        index += 1
        while index < len(marks) and marks[index].flow == first.flow and marks[index].effect == first.effect:
            run.append(marks[index].threat)
            index += 1
        verb = "mark" if first.effect is MarkEffect.INCLUDE else "unmark"
        lines.append(f"  {verb} {first.flow} threats={_idlist(run)}")
    lines.append("}")
    return lines


def _render_catalog(catalog: Catalog) -> list[str]:
    lines = ["catalog {"]
    for threat in catalog.threats:
        stmt = f"  threat {threat.id} name={_quote(threat.name)} i={threat.initial_consequence}"
        if threat.aggravates:
            stmt += f" aggravates={_idlist(threat.aggravates)}"
        if threat.misactors:
            stmt += f" misactors={_idlist(m.value for m in threat.misactors)}"
        if threat.assets:
            stmt += f" assets={_stringlist(threat.assets)}"
        lines.append(stmt)
    lines.append("}")
    return lines


def _render_rules(ruleset: RuleSet) -> list[str]:
    lines = ["rules {"]
    for rule in ruleset.rules:
        lines.append(f"  rule {rule.threat} when {_expr_text(rule.predicate)}")
    lines.append("}")
    return lines


def _render_scenario(scenario: PetScenario) -> list[str]:
    lines = [f"scenario {_quote(scenario.name)} {{"]
    lines.append(f"  clears={_idlist(scenario.clears)}")
    if scenario.threat_filter is not None:
        lines.append(f"  threats={_idlist(scenario.threat_filter)}")
    if scenario.pets:
        lines.append(f"  pets={_stringlist(scenario.pets)}")
    lines.append("}")
    return lines


def render(document: Document) -> str:
    """Canonical text of a document: parse(render(d)) equals d structurally.

    One statement per line, two-space indent, attributes in grammar order,
    top-level blocks separated by one blank line. Comments are not part of
    the structure, so they do not survive a round trip.
    """
    chunks = []
    for item in document.items:
        if isinstance(item, Model):
            chunks.append("\n".join(_render_model(item)))
        elif isinstance(item, Catalog):
            chunks.append("\n".join(_render_catalog(item)))
        elif isinstance(item, RuleSet):
            chunks.append("\n".join(_render_rules(item)))
        elif isinstance(item, PetScenario):
            chunks.append("\n".join(_render_scenario(item)))
        else:
            raise TypeError(f"unsupported document item {item!r}")
    if not chunks:
        return ""
    return "\n\n".join(chunks) + "\n"
