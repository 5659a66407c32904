"""The declarative rule language and its parser.

A grammar file is a sequence of rules, each terminated by `;`:

    X-Ticks -> Ticks X-Line
        (X-Line)
        (Ticks (touch X-Line ?)
            :constraints (> (number-of Ticks) 2));

    Ticks -> Set ( Line )
        (:element-constraints (vertp Line) (short Line))
        (:constraints (horiz-aligned));

Ordinary rules list their constituents after `->`; set rules use
`Set ( ElementType )`.  Body clauses are parenthesized: a clause may name a
constituent (optionally with a context expression and per-clause
`:constraints`), or be one of the directives `:null`, `:additional-slots`,
`:constraints` / `:constraint` (synonyms), `:element-constraints`,
`:largest`.  Symbol names are case-insensitive; lines starting with `*****`
are comments.

Context expressions come in three shapes:

  (touch X-Line ?)        relation form: `?` is the candidate set, the other
                          argument anchors the query
  (X-Line context)        type form: parse the named type from the inherited
                          context
  Axis                    a bare previously-bound name: the constituent must
                          share structure with that binding
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Mapping

from .errors import GrammarSyntaxError

Expr = object  # str (symbol), float (number) or tuple of Expr

PRIMITIVE_TYPE_NAMES = ("line", "circle", "polygon", "curve", "text")

CONSTANT_NAMES = ("*tiny*", "*very-long*")


def canon(name: str) -> str:
    return name.lower()


# --------------------------------------------------------------------------
# Rule structures
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class ConstituentClause:
    name: str
    # One of None, ("type", name), ("relation", expr), ("share", name)
    context_form: tuple | None
    constraints: tuple
    implicit: bool = False


@dataclass(frozen=True)
class OrdinaryRule:
    lhs: str
    constituents: tuple[str, ...]
    clauses: tuple[ConstituentClause, ...]
    constraints: tuple
    null_names: tuple[str, ...]
    slots: tuple[tuple[str, Expr], ...]

    kind = "ordinary"


@dataclass(frozen=True)
class SetRule:
    lhs: str
    element_type: str
    element_constraints: tuple
    set_constraints: tuple
    largest: bool

    kind = "set"


Rule = OrdinaryRule | SetRule


@dataclass
class Grammar:
    rules: tuple[Rule, ...]
    display: dict[str, str] = field(default_factory=dict)

    def __post_init__(self) -> None:
        table: dict[str, list[Rule]] = {}
        for rule in self.rules:
            table.setdefault(rule.lhs, []).append(rule)
        self._table = table

    def alternatives(self, name: str) -> list[Rule]:
        return self._table.get(canon(name), [])

    def rule_names(self) -> list[str]:
        return list(self._table)

    def defines(self, name: str) -> bool:
        return canon(name) in self._table

    def display_name(self, name: str) -> str:
        return self.display.get(name, name)

    def __eq__(self, other) -> bool:
        if not isinstance(other, Grammar):
            return NotImplemented
        return self.rules == other.rules


# --------------------------------------------------------------------------
# Tokenizer / reader
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class _Token:
    type: str  # "(", ")", ";", "->", "sym", "num"
    value: object
    display: str
    line: int
    column: int


def _tokenize(text: str) -> list[_Token]:
    tokens: list[_Token] = []
    for line_no, raw in enumerate(text.splitlines(), start=1):
        if raw.lstrip().startswith("*****"):
            continue
        col = 0
        length = len(raw)
        while col < length:
            ch = raw[col]
            if ch.isspace():
                col += 1
                continue
            if ch in "();":
                tokens.append(_Token(ch, ch, ch, line_no, col + 1))
                col += 1
                continue
            start = col
            while col < length and not raw[col].isspace() and raw[col] not in "();":
                col += 1
            word = raw[start:col]
            if word == "->":
                tokens.append(_Token("->", word, word, line_no, start + 1))
                continue
            try:
                num = float(word)
            except ValueError:
                tokens.append(_Token("sym", canon(word), word, line_no, start + 1))
            else:
                tokens.append(_Token("num", num, word, line_no, start + 1))
    return tokens


class _Reader:
    def __init__(self, tokens: list[_Token], display: dict[str, str]) -> None:
        self.tokens = tokens
        self.pos = 0
        self.display = display

    def peek(self) -> _Token | None:
        return self.tokens[self.pos] if self.pos < len(self.tokens) else None

    def next(self) -> _Token:
        tok = self.peek()
        if tok is None:
            last = self.tokens[-1] if self.tokens else None
            raise GrammarSyntaxError(
                "unexpected end of input",
                last.line if last else 1,
                last.column if last else 1,
            )
        self.pos += 1
        return tok

    def expect(self, type_: str) -> _Token:
        tok = self.next()
        if tok.type != type_:
            raise GrammarSyntaxError(f"expected '{type_}', found '{tok.display}'",
                                     tok.line, tok.column)
        return tok

    def read_expr(self) -> Expr:
        tok = self.next()
        if tok.type == "(":
            items = []
            while True:
                nxt = self.peek()
                if nxt is None:
                    raise GrammarSyntaxError("unclosed '('", tok.line, tok.column)
                if nxt.type == ")":
                    self.next()
                    return tuple(items)
                items.append(self.read_expr())
        if tok.type == "sym":
            self.display.setdefault(tok.value, tok.display)
            return tok.value
        if tok.type == "num":
            return tok.value
        raise GrammarSyntaxError(f"unexpected '{tok.display}'", tok.line, tok.column)


# --------------------------------------------------------------------------
# Rule assembly
# --------------------------------------------------------------------------

def parse_grammar(text: str) -> Grammar:
    """Parse grammar source into rules, preserving body-clause order."""
    display: dict[str, str] = {}
    reader = _Reader(_tokenize(text), display)
    rules: list[Rule] = []
    while reader.peek() is not None:
        rules.append(_parse_rule(reader))
    return Grammar(tuple(rules), display)


def _parse_rule(reader: _Reader) -> Rule:
    lhs_tok = reader.expect("sym")
    reader.display.setdefault(lhs_tok.value, lhs_tok.display)
    reader.expect("->")
    rhs_names: list[str] = []
    rhs_tokens: list[_Token] = []
    while True:
        tok = reader.peek()
        if tok is None:
            raise GrammarSyntaxError("rule is missing ';'", lhs_tok.line, lhs_tok.column)
        if tok.type != "sym":
            break
        reader.next()
        reader.display.setdefault(tok.value, tok.display)
        rhs_names.append(tok.value)
        rhs_tokens.append(tok)
    body: list[tuple] = []
    while True:
        tok = reader.peek()
        if tok is None:
            raise GrammarSyntaxError("rule is missing ';'", lhs_tok.line, lhs_tok.column)
        if tok.type == ";":
            reader.next()
            break
        if tok.type != "(":
            raise GrammarSyntaxError(f"unexpected '{tok.display}' in rule body",
                                     tok.line, tok.column)
        expr = reader.read_expr()
        body.append(expr)

    if rhs_names and rhs_names[0] == "set":
        if len(rhs_names) != 1:
            tok = rhs_tokens[1]
            raise GrammarSyntaxError("set rules take a single parenthesized element type",
                                     tok.line, tok.column)
        if not body or not (isinstance(body[0], tuple) and len(body[0]) == 1
                            and isinstance(body[0][0], str)):
            raise GrammarSyntaxError("set rule needs '( ElementType )' after Set",
                                     lhs_tok.line, lhs_tok.column)
        element_type = body[0][0]
        return _assemble_set_rule(lhs_tok, element_type, body[1:])
    if not rhs_names:
        raise GrammarSyntaxError("rule has no constituents", lhs_tok.line, lhs_tok.column)
    return _assemble_ordinary_rule(lhs_tok, rhs_names, body)


def _is_directive(clause: tuple, *names: str) -> bool:
    return bool(clause) and isinstance(clause[0], str) and clause[0] in names


def _assemble_ordinary_rule(lhs_tok: _Token, rhs: list[str], body: list[tuple]) -> OrdinaryRule:
    lhs = lhs_tok.value
    clauses: list[ConstituentClause] = []
    constraints: list[Expr] = []
    null_names: list[str] = []
    slots: list[tuple[str, Expr]] = []
    for clause in body:
        if not clause:
            raise GrammarSyntaxError("empty clause", lhs_tok.line, lhs_tok.column)
        head = clause[0]
        if _is_directive(clause, ":null"):
            for name in clause[1:]:
                if not isinstance(name, str):
                    raise GrammarSyntaxError(":null takes constituent names",
                                             lhs_tok.line, lhs_tok.column)
                null_names.append(name)
        elif _is_directive(clause, ":additional-slots"):
            for entry in clause[1:]:
                if not (isinstance(entry, tuple) and len(entry) == 2
                        and isinstance(entry[0], str)):
                    raise GrammarSyntaxError(":additional-slots entries are (name expr)",
                                             lhs_tok.line, lhs_tok.column)
                slots.append((entry[0], entry[1]))
        elif _is_directive(clause, ":constraints", ":constraint"):
            constraints.extend(clause[1:])
        elif isinstance(head, str) and head.startswith(":"):
            raise GrammarSyntaxError(f"directive '{head}' not allowed in an ordinary rule",
                                     lhs_tok.line, lhs_tok.column)
        else:
            clauses.append(_parse_constituent_clause(clause, lhs_tok))
    explicit = {c.name for c in clauses}
    for name in rhs:
        if name not in explicit:
            clauses.append(ConstituentClause(name, None, (), implicit=True))
    dup_slots = {n for n in [s[0] for s in slots] if [s[0] for s in slots].count(n) > 1}
    if dup_slots:
        raise GrammarSyntaxError(f"duplicate slot name: {sorted(dup_slots)[0]}",
                                 lhs_tok.line, lhs_tok.column)
    return OrdinaryRule(
        lhs=lhs,
        constituents=tuple(rhs),
        clauses=tuple(clauses),
        constraints=tuple(constraints),
        null_names=tuple(null_names),
        slots=tuple(slots),
    )


def _parse_constituent_clause(clause: tuple, lhs_tok: _Token) -> ConstituentClause:
    name = clause[0]
    if not isinstance(name, str):
        raise GrammarSyntaxError("clause must start with a constituent name",
                                 lhs_tok.line, lhs_tok.column)
    rest = list(clause[1:])
    context_form: tuple | None = None
    if rest and not (isinstance(rest[0], str) and rest[0].startswith(":")):
        expr = rest.pop(0)
        context_form = _classify_context_expr(expr, lhs_tok)
    constraints: list[Expr] = []
    if rest:
        key = rest[0]
        if not (isinstance(key, str) and key in (":constraints", ":constraint")):
            raise GrammarSyntaxError(
                f"unexpected '{key}' in clause for {name}", lhs_tok.line, lhs_tok.column)
        constraints = rest[1:]
    return ConstituentClause(name, context_form, tuple(constraints))


def _classify_context_expr(expr: Expr, lhs_tok: _Token) -> tuple:
    if isinstance(expr, str):
        return ("share", expr)
    if isinstance(expr, tuple):
        if len(expr) == 2 and isinstance(expr[0], str) and expr[1] == "context":
            return ("type", expr[0])
        if any(item == "?" for item in expr):
            return ("relation", expr)
    raise GrammarSyntaxError(f"unrecognized context expression {format_expr(expr)}",
                             lhs_tok.line, lhs_tok.column)


def _assemble_set_rule(lhs_tok: _Token, element_type: str, body: list[tuple]) -> SetRule:
    element_constraints: list[Expr] = []
    set_constraints: list[Expr] = []
    largest = False
    for clause in body:
        if _is_directive(clause, ":element-constraints"):
            element_constraints.extend(clause[1:])
        elif _is_directive(clause, ":constraints", ":constraint"):
            set_constraints.extend(clause[1:])
        elif _is_directive(clause, ":largest"):
            largest = True
        else:
            raise GrammarSyntaxError(
                f"unexpected clause {format_expr(clause)} in set rule",
                lhs_tok.line, lhs_tok.column)
    return SetRule(
        lhs=lhs_tok.value,
        element_type=element_type,
        element_constraints=tuple(element_constraints),
        set_constraints=tuple(set_constraints),
        largest=largest,
    )


# --------------------------------------------------------------------------
# Validation
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class Diagnostic:
    rule: str
    message: str

    def __str__(self) -> str:
        return f"{self.rule}: {self.message}"


def clause_dispatch_type(clause: ConstituentClause) -> str | None:
    """The type a constituent clause parses: an explicit `(Type context)`
    override, the clause name itself, or None for relation forms (which
    still parse the clause name's type)."""
    if clause.context_form and clause.context_form[0] == "type":
        return clause.context_form[1]
    return clause.name


def is_primitive_type(name: str) -> bool:
    return name in PRIMITIVE_TYPE_NAMES


def validate_grammar(grammar: Grammar, vocabulary: Mapping[str, tuple[int, int | None]],
                     ger_names: Iterable[str]) -> list[Diagnostic]:
    """Check cross-rule invariants; an empty list means the grammar is
    well-formed.  `vocabulary` maps constraint heads to (min, max) arity."""
    out: list[Diagnostic] = []
    gers = set(ger_names)

    def resolvable(name: str) -> bool:
        return is_primitive_type(name) or grammar.defines(name)

    for rule in grammar.rules:
        display = grammar.display_name(rule.lhs)
        if isinstance(rule, SetRule):
            if rule.element_type == rule.lhs:
                out.append(Diagnostic(display, "left recursion: set element is the rule itself"))
            elif not resolvable(rule.element_type):
                out.append(Diagnostic(display, f"unresolved element type '{rule.element_type}'"))
            for expr in rule.element_constraints:
                _check_expr(expr, {rule.element_type}, vocabulary, gers, display, out)
            for expr in rule.set_constraints:
                _check_expr(expr, {rule.lhs, rule.element_type, "self"},
                            vocabulary, gers, display, out, allow_bare_ger=True)
            continue

        bound: set[str] = set()
        for clause in rule.clauses:
            if clause.name not in rule.constituents:
                out.append(Diagnostic(
                    display, f"clause names undeclared constituent '{clause.name}'"))
            dispatch = clause_dispatch_type(clause)
            if dispatch == rule.lhs:
                out.append(Diagnostic(display, f"left recursion via constituent '{clause.name}'"))
            elif not resolvable(dispatch):
                out.append(Diagnostic(
                    display, f"unresolved constituent type '{dispatch}'"))
            if clause.context_form:
                kind = clause.context_form[0]
                if kind == "share":
                    anchor = clause.context_form[1]
                    if anchor not in bound:
                        out.append(Diagnostic(
                            display, f"share anchor '{anchor}' is not bound before '{clause.name}'"))
                elif kind == "relation":
                    _check_relation_expr(clause.context_form[1], bound, vocabulary,
                                         gers, display, out)
            bound.add(clause.name)
            for expr in clause.constraints:
                _check_expr(expr, bound, vocabulary, gers, display, out)
        for name in rule.null_names:
            if name not in rule.constituents:
                out.append(Diagnostic(display, f":null names undeclared constituent '{name}'"))
        for slot_name, expr in rule.slots:
            _check_expr(expr, set(rule.constituents) | {"self"}, vocabulary, gers,
                        display, out, accessor_names=set(rule.constituents))
        for expr in rule.constraints:
            _check_expr(expr, set(rule.constituents) | {"self"}, vocabulary, gers, display, out)
    return out


def _check_relation_expr(expr: tuple, bound: set[str], vocabulary, gers, rule_name: str,
                         out: list[Diagnostic]) -> None:
    if not expr or not isinstance(expr[0], str):
        out.append(Diagnostic(rule_name, f"malformed relation {format_expr(expr)}"))
        return
    head = expr[0]
    if head not in vocabulary:
        out.append(Diagnostic(rule_name, f"unknown relation '{head}'"))
        return
    if sum(1 for a in expr[1:] if a == "?") != 1:
        out.append(Diagnostic(rule_name, f"relation {format_expr(expr)} needs exactly one '?'"))
    for arg in expr[1:]:
        if arg == "?" or _is_constant(arg) or not isinstance(arg, (str, tuple)):
            continue
        if isinstance(arg, str):
            if arg.startswith(":") or arg == "t":
                continue
            if arg not in bound and arg != "context":
                out.append(Diagnostic(
                    rule_name, f"relation anchor '{arg}' is not a bound constituent"))
        else:
            _check_expr(arg, bound, vocabulary, gers, rule_name, out)


def _is_constant(expr) -> bool:
    return isinstance(expr, str) and expr in CONSTANT_NAMES


def _check_expr(expr: Expr, bound: set[str], vocabulary, gers, rule_name: str,
                out: list[Diagnostic], allow_bare_ger: bool = False,
                accessor_names: set[str] | None = None) -> None:
    if isinstance(expr, float):
        return
    if isinstance(expr, str):
        if expr in gers and allow_bare_ger:
            return
        if (_is_constant(expr) or expr in bound or expr in ("t", "nil", "self", "?")
                or expr.startswith(":")):
            return
        out.append(Diagnostic(rule_name, f"unbound name '{expr}'"))
        return
    if not expr:
        out.append(Diagnostic(rule_name, "empty constraint"))
        return
    head = expr[0]
    if not isinstance(head, str):
        out.append(Diagnostic(rule_name, f"malformed constraint {format_expr(expr)}"))
        return
    if head in gers and len(expr) == 1:
        return
    arity = vocabulary.get(head)
    if arity is None and accessor_names and head in accessor_names:
        arity = (1, 1)
    if arity is None:
        out.append(Diagnostic(rule_name, f"unknown predicate '{head}'"))
        return
    args = _positional_args(expr)
    lo, hi = arity
    if len(args) < lo or (hi is not None and len(args) > hi):
        wanted = str(lo) if hi == lo else f"{lo}..{hi if hi is not None else 'n'}"
        out.append(Diagnostic(rule_name,
                              f"'{head}' takes {wanted} arguments, got {len(args)}"))
    for arg in args:
        _check_expr(arg, bound, vocabulary, gers, rule_name, out,
                    accessor_names=accessor_names)


def _positional_args(expr: tuple) -> list:
    args = []
    items = list(expr[1:])
    k = 0
    while k < len(items):
        item = items[k]
        if isinstance(item, str) and item.startswith(":"):
            k += 2
            continue
        args.append(item)
        k += 1
    return args


# --------------------------------------------------------------------------
# Metadata and pretty-printing
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class RuleMeta:
    slots: tuple[str, ...]
    primitive_only: bool
    alternatives: tuple[Rule, ...]


def rule_metadata(grammar: Grammar) -> dict[str, RuleMeta]:
    """Per-LHS derived information used for parser dispatch."""
    meta: dict[str, RuleMeta] = {}
    for name in grammar.rule_names():
        alts = grammar.alternatives(name)
        slots: list[str] = []
        primitive_only = True
        for rule in alts:
            if isinstance(rule, SetRule):
                primitive_only = primitive_only and is_primitive_type(rule.element_type)
            else:
                for slot_name, _ in rule.slots:
                    if slot_name not in slots:
                        slots.append(slot_name)
                for clause in rule.clauses:
                    if not is_primitive_type(clause_dispatch_type(clause)):
                        primitive_only = False
        meta[name] = RuleMeta(tuple(slots), primitive_only, tuple(alts))
    return meta


def format_expr(expr: Expr, display: Mapping[str, str] | None = None) -> str:
    if isinstance(expr, tuple):
        return "(" + " ".join(format_expr(e, display) for e in expr) + ")"
    if isinstance(expr, float):
        return str(int(expr)) if expr.is_integer() else repr(expr)
    if display is not None:
        return display.get(expr, expr)
    return expr


def pretty_print(grammar: Grammar) -> str:
    """Render a grammar back to source; reparsing the output reproduces the
    same structure."""
    disp = grammar.display
    out: list[str] = []

    def name(sym: str) -> str:
        return disp.get(sym, sym)

    for rule in grammar.rules:
        if isinstance(rule, SetRule):
            lines = [f"{name(rule.lhs)} -> Set ( {name(rule.element_type)} )"]
            if rule.element_constraints:
                lines.append("  (:element-constraints "
                             + " ".join(format_expr(e, disp) for e in rule.element_constraints)
                             + ")")
            if rule.set_constraints:
                lines.append("  (:constraints "
                             + " ".join(format_expr(e, disp) for e in rule.set_constraints)
                             + ")")
            if rule.largest:
                lines.append("  (:largest t)")
        else:
            lines = [f"{name(rule.lhs)} -> " + " ".join(name(c) for c in rule.constituents)]
            if rule.null_names:
                lines.append("  (:null " + " ".join(name(n) for n in rule.null_names) + ")")
            if rule.slots:
                entries = " ".join(f"({name(s)} {format_expr(e, disp)})" for s, e in rule.slots)
                lines.append(f"  (:additional-slots {entries})")
            for clause in rule.clauses:
                if clause.implicit:
                    continue
                parts = [name(clause.name)]
                if clause.context_form:
                    kind = clause.context_form[0]
                    if kind == "type":
                        parts.append(f"({name(clause.context_form[1])} context)")
                    elif kind == "share":
                        parts.append(name(clause.context_form[1]))
                    else:
                        parts.append(format_expr(clause.context_form[1], disp))
                if clause.constraints:
                    parts.append(":constraints")
                    parts.extend(format_expr(e, disp) for e in clause.constraints)
                lines.append("  (" + " ".join(parts) + ")")
            if rule.constraints:
                lines.append("  (:constraints "
                             + " ".join(format_expr(e, disp) for e in rule.constraints) + ")")
        out.append("\n".join(lines) + ";")
    return "\n\n".join(out) + "\n"
