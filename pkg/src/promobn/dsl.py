"""Textual network DSL: tokenizer, recursive-descent parser, serializer.

The grammar (documented in docs/dsl.md) is a single-lookahead language:

    network "name" { node Ident { clause* } ... }

where clauses are ``kind:``, ``parents:``, ``states:``, ``prior:``,
``cpt:``, ``map:`` and ``equation:``. Equation expressions are sums of
``Choose(selector, branch, ...)`` terms whose branches are optionally
scaled distribution calls; ``*`` binds tighter than ``+``.
"""

from __future__ import annotations

from dataclasses import dataclass

from .distributions import LognormalTerm, TriangularTerm
from .network import ChooseTerm, EquationExpr, Network, Node, NodeKind, validate_network

KEYWORDS = frozenset(
    {
        "network",
        "node",
        "kind",
        "parents",
        "states",
        "prior",
        "cpt",
        "map",
        "equation",
        "chance",
        "deterministic",
        "Choose",
        "Triangular",
        "Lognormal",
    }
)

_PUNCT_TWO = ("->",)
_PUNCT_ONE = "{}[](),:;*+"

# priors/CPT rows whose sum misses 1 by at most this are silently
# renormalized (decimal round-trip noise); larger deviations are errors.
RENORM_TOL = 1e-6 + 1e-12


@dataclass
class Token:
    kind: str  # keyword | identifier | number | punctuation | string | eof
    text: str
    line: int
    column: int


class ParseError(ValueError):
    def __init__(self, message: str, line: int, column: int, expected: str | None = None):
        self.message = message
        self.line = line
        self.column = column
        self.expected = expected
        suffix = f" (expected {expected})" if expected else ""
        super().__init__(f"{line}:{column}: {message}{suffix}")


def tokenize(text: str) -> list[Token]:
    """Longest-match lexing; ``#`` starts a line comment. Ends with an eof token."""
    tokens: list[Token] = []
    i = 0
    line = 1
    col = 1

    def bump(n: int) -> None:
        nonlocal i, col
        i += n
        col += n

    while i < len(text):
        ch = text[i]
        if ch == "\n":
            i += 1
            line += 1
            col = 1
            continue
        if ch in " \t\r":
            bump(1)
            continue
        if ch == "#":
            while i < len(text) and text[i] != "\n":
                bump(1)
            continue
        start_line, start_col = line, col
        two = text[i : i + 2]
        if two in _PUNCT_TWO:
            tokens.append(Token("punctuation", two, start_line, start_col))
            bump(2)
            continue
        if ch.isdigit() or (ch == "-" and i + 1 < len(text) and text[i + 1].isdigit()):
            j = i + 1
            while j < len(text) and (text[j].isdigit() or text[j] == "."):
                j += 1
            if j < len(text) and text[j] in "eE":
                k = j + 1
                if k < len(text) and text[k] in "+-":
                    k += 1
                if k < len(text) and text[k].isdigit():
                    j = k
                    while j < len(text) and text[j].isdigit():
                        j += 1
            lexeme = text[i:j]
            try:
                float(lexeme)
            except ValueError:
                raise ParseError(f"malformed number {lexeme!r}", start_line, start_col)
            tokens.append(Token("number", lexeme, start_line, start_col))
            bump(j - i)
            continue
        if ch in _PUNCT_ONE:
            tokens.append(Token("punctuation", ch, start_line, start_col))
            bump(1)
            continue
        if ch.isalpha() or ch == "_":
            j = i
            while j < len(text) and (text[j].isalnum() or text[j] == "_"):
                j += 1
            lexeme = text[i:j]
            kind = "keyword" if lexeme in KEYWORDS else "identifier"
            tokens.append(Token(kind, lexeme, start_line, start_col))
            bump(j - i)
            continue
        if ch == '"':
            j = i + 1
            chars: list[str] = []
            while j < len(text) and text[j] != '"':
                if text[j] == "\n":
                    raise ParseError("unterminated string", start_line, start_col)
                if text[j] == "\\" and j + 1 < len(text) and text[j + 1] in ('"', "\\"):
                    chars.append(text[j + 1])
                    j += 2
                    continue
                chars.append(text[j])
                j += 1
            if j >= len(text):
                raise ParseError("unterminated string", start_line, start_col)
            tokens.append(Token("string", "".join(chars), start_line, start_col))
            bump(j + 1 - i)
            continue
        raise ParseError(f"illegal character {ch!r}", start_line, start_col)

    tokens.append(Token("eof", "", line, col))
    return tokens


class _Parser:
    def __init__(self, tokens: list[Token]):
        self.tokens = tokens
        self.pos = 0

    def peek(self) -> Token:
        return self.tokens[self.pos]

    def advance(self) -> Token:
        tok = self.tokens[self.pos]
        if tok.kind != "eof":
            self.pos += 1
        return tok

    def at(self, kind: str, text: str | None = None) -> bool:
        tok = self.peek()
        return tok.kind == kind and (text is None or tok.text == text)

    def fail(self, message: str, expected: str | None = None, tok: Token | None = None):
        tok = tok or self.peek()
        raise ParseError(message, tok.line, tok.column, expected)

    def expect(self, kind: str, text: str | None = None, expected: str | None = None) -> Token:
        if not self.at(kind, text):
            tok = self.peek()
            what = expected or (text or kind)
            raise ParseError(
                f"unexpected {tok.kind} {tok.text!r}" if tok.kind != "eof" else "unexpected end of input",
                tok.line,
                tok.column,
                what,
            )
        return self.advance()

    def skip_separators(self) -> None:
        while self.at("punctuation", ";"):
            self.advance()

    # grammar rules -------------------------------------------------------

    def network(self) -> Network:
        header = self.expect("keyword", "network")
        name = self.expect("string", expected="network name string").text
        self.expect("punctuation", "{")
        nodes: list[Node] = []
        node_tokens: dict[str, Token] = {}
        while not self.at("punctuation", "}"):
            if self.at("eof"):
                self.fail("unclosed network block", expected="'}'")
            node, tok = self.node()
            nodes.append(node)
            node_tokens.setdefault(node.name, tok)
        self.expect("punctuation", "}")
        if not self.at("eof"):
            self.fail("trailing input after network block")
        net = Network(name=name, nodes=nodes)
        self._renormalize(net, node_tokens)
        violations = validate_network(net)
        if violations:
            v = violations[0]
            tok = node_tokens.get(v.node or "", header)
            raise ParseError(f"invalid network: {v}", tok.line, tok.column)
        return net

    def node(self) -> tuple[Node, Token]:
        self.expect("keyword", "node")
        name_tok = self.expect("identifier", expected="node name")
        self.expect("punctuation", "{")
        kind: NodeKind | None = None
        clauses: dict[str, object] = {}

        def set_clause(key: str, value) -> None:
            if key in clauses:
                self.fail(f"duplicate {key} clause in node {name_tok.text!r}", tok=name_tok)
            clauses[key] = value

        while not self.at("punctuation", "}"):
            tok = self.peek()
            if tok.kind == "eof":
                self.fail(f"unclosed node block for {name_tok.text!r}", expected="'}'")
            if tok.kind != "keyword":
                self.fail(f"unexpected {tok.kind} {tok.text!r} in node body", expected="a clause keyword")
            if tok.text == "kind":
                self.advance()
                self.expect("punctuation", ":")
                kind_tok = self.peek()
                if kind_tok.kind == "keyword" and kind_tok.text in ("chance", "deterministic", "equation"):
                    if kind is not None:
                        self.fail(f"duplicate kind clause in node {name_tok.text!r}", tok=kind_tok)
                    kind = NodeKind(kind_tok.text)
                    self.advance()
                else:
                    self.fail("unknown node kind", expected="chance, deterministic or equation")
            elif tok.text == "parents":
                self.advance()
                self.expect("punctuation", ":")
                set_clause("parents", tuple(self.ident_list()))
            elif tok.text == "states":
                self.advance()
                self.expect("punctuation", ":")
                set_clause("states", tuple(self.ident_list()))
            elif tok.text == "prior":
                self.advance()
                self.expect("punctuation", ":")
                set_clause("prior", tuple(self.number_list()))
            elif tok.text == "cpt":
                self.advance()
                self.expect("punctuation", ":")
                set_clause("cpt", self.cpt_block())
            elif tok.text == "map":
                self.advance()
                self.expect("punctuation", ":")
                set_clause("map", self.map_block())
            elif tok.text == "equation":
                self.advance()
                self.expect("punctuation", ":")
                set_clause("equation", self.expression())
            else:
                self.fail(f"unexpected keyword {tok.text!r} in node body", expected="a clause keyword")
        self.expect("punctuation", "}")
        if kind is None:
            self.fail(f"node {name_tok.text!r} has no kind clause", tok=name_tok)
        node = Node(
            name=name_tok.text,
            kind=kind,
            parents=clauses.get("parents", ()),
            states=clauses.get("states", ()),
            prior=clauses.get("prior"),
            cpt=clauses.get("cpt"),
            det_map=clauses.get("map"),
            expr=clauses.get("equation"),
        )
        return node, name_tok

    def ident_list(self) -> list[str]:
        self.expect("punctuation", "[")
        items: list[str] = []
        while not self.at("punctuation", "]"):
            if items:
                self.expect("punctuation", ",")
            items.append(self.expect("identifier", expected="a name").text)
        self.expect("punctuation", "]")
        return items

    def number_list(self) -> list[float]:
        self.expect("punctuation", "[")
        items: list[float] = []
        while not self.at("punctuation", "]"):
            if items:
                self.expect("punctuation", ",")
            items.append(float(self.expect("number").text))
        self.expect("punctuation", "]")
        return items

    def state_tuple(self) -> tuple[str, ...]:
        self.expect("punctuation", "(")
        items: list[str] = []
        while not self.at("punctuation", ")"):
            if items:
                self.expect("punctuation", ",")
            items.append(self.expect("identifier", expected="a parent state").text)
        self.expect("punctuation", ")")
        return tuple(items)

    def cpt_block(self) -> dict[tuple[str, ...], tuple[float, ...]]:
        self.expect("punctuation", "{")
        rows: dict[tuple[str, ...], tuple[float, ...]] = {}
        while not self.at("punctuation", "}"):
            self.skip_separators()
            if self.at("punctuation", "}"):
                break
            key_tok = self.peek()
            key = self.state_tuple()
            self.expect("punctuation", "->")
            row = tuple(self.number_list())
            if key in rows:
                self.fail(f"duplicate CPT row for {key}", tok=key_tok)
            rows[key] = row
            self.skip_separators()
        self.expect("punctuation", "}")
        return rows

    def map_block(self) -> dict[tuple[str, ...], str]:
        self.expect("punctuation", "{")
        rows: dict[tuple[str, ...], str] = {}
        while not self.at("punctuation", "}"):
            self.skip_separators()
            if self.at("punctuation", "}"):
                break
            key_tok = self.peek()
            key = self.state_tuple()
            self.expect("punctuation", "->")
            target = self.expect("identifier", expected="a target state").text
            if key in rows:
                self.fail(f"duplicate map entry for {key}", tok=key_tok)
            rows[key] = target
            self.skip_separators()
        self.expect("punctuation", "}")
        return rows

    def expression(self) -> EquationExpr:
        terms = [self.choose_term()]
        while self.at("punctuation", "+"):
            self.advance()
            terms.append(self.choose_term())
        return EquationExpr(terms=tuple(terms))

    def choose_term(self) -> ChooseTerm:
        self.expect("keyword", "Choose")
        self.expect("punctuation", "(")
        selector = self.expect("identifier", expected="selector node name").text
        branches = []
        while self.at("punctuation", ","):
            self.advance()
            branches.append(self.branch())
        self.expect("punctuation", ")")
        if not branches:
            self.fail(f"Choose on {selector!r} has no branches")
        return ChooseTerm(selector=selector, branches=tuple(branches))

    def branch(self):
        scale = 1.0
        if self.at("number"):
            scale_tok = self.advance()
            scale = float(scale_tok.text)
            self.expect("punctuation", "*")
        tok = self.peek()
        if self.at("keyword", "Triangular"):
            self.advance()
            self.expect("punctuation", "(")
            a = float(self.expect("number").text)
            self.expect("punctuation", ",")
            c = float(self.expect("number").text)
            self.expect("punctuation", ",")
            b = float(self.expect("number").text)
            self.expect("punctuation", ")")
            try:
                return TriangularTerm(a, c, b, scale=scale)
            except ValueError as e:
                raise ParseError(str(e), tok.line, tok.column) from None
        if self.at("keyword", "Lognormal"):
            self.advance()
            self.expect("punctuation", "(")
            mu = float(self.expect("number").text)
            self.expect("punctuation", ",")
            sigma = float(self.expect("number").text)
            self.expect("punctuation", ")")
            try:
                return LognormalTerm(mu, sigma, scale=scale)
            except ValueError as e:
                raise ParseError(str(e), tok.line, tok.column) from None
        self.fail("unknown distribution", expected="Triangular or Lognormal")

    # semantic fixups ------------------------------------------------------

    def _renormalize(self, net: Network, node_tokens: dict[str, Token]) -> None:
        for node in net.nodes:
            tok = node_tokens.get(node.name)
            if node.prior is not None:
                node.prior = self._renorm_row(node.prior, node.name, "prior", tok)
            if node.cpt is not None:
                node.cpt = {
                    key: self._renorm_row(row, node.name, f"CPT row {key}", tok)
                    for key, row in node.cpt.items()
                }

    @staticmethod
    def _renorm_row(row, node_name, what, tok) -> tuple[float, ...]:
        total = sum(row)
        if abs(total - 1.0) <= RENORM_TOL:
            if total != 1.0 and total > 0:
                return tuple(p / total for p in row)
            return tuple(row)
        line = tok.line if tok else 1
        col = tok.column if tok else 1
        raise ParseError(
            f"node {node_name!r}: {what} sums to {total:.9g}, not 1", line, col
        )


def parse_network(text: str) -> Network:
    """Parse DSL text into a Network that passes validate_network."""
    return _Parser(tokenize(text)).network()


def _fmt(x: float) -> str:
    """Up to 6 significant digits, no trailing zeros; falls back to repr
    when 6 digits would move the value by more than 1e-9."""
    s = format(x, ".6g")
    if abs(float(s) - x) <= 1e-9 * max(1.0, abs(x)):
        return s
    return repr(float(x))


def _fmt_branch(term) -> str:
    prefix = f"{_fmt(term.scale)} * " if term.scale != 1.0 else ""
    if isinstance(term, TriangularTerm):
        return f"{prefix}Triangular({_fmt(term.minimum)}, {_fmt(term.mode)}, {_fmt(term.maximum)})"
    return f"{prefix}Lognormal({_fmt(term.mu)}, {_fmt(term.sigma)})"


def serialize_network(net: Network) -> str:
    """Canonical DSL text; parse_network(serialize_network(n)) == n structurally."""
    name = net.name.replace("\\", "\\\\").replace('"', '\\"')
    lines = [f'network "{name}" {{']
    for node in net.nodes:
        lines.append(f"  node {node.name} {{")
        lines.append(f"    kind: {node.kind.value}")
        if node.parents:
            lines.append(f"    parents: [{', '.join(node.parents)}]")
        if node.states:
            lines.append(f"    states: [{', '.join(node.states)}]")
        if node.prior is not None:
            lines.append(f"    prior: [{', '.join(_fmt(p) for p in node.prior)}]")
        if node.cpt is not None:
            lines.append("    cpt: {")
            for key in _canonical_keys(node.cpt):
                row = ", ".join(_fmt(p) for p in node.cpt[key])
                lines.append(f"      ({', '.join(key)}) -> [{row}]")
            lines.append("    }")
        if node.det_map is not None:
            lines.append("    map: {")
            for key in _canonical_keys(node.det_map):
                lines.append(f"      ({', '.join(key)}) -> {node.det_map[key]}")
            lines.append("    }")
        if node.expr is not None:
            parts = []
            for term in node.expr.terms:
                branches = ", ".join(_fmt_branch(b) for b in term.branches)
                parts.append(f"Choose({term.selector}, {branches})")
            joined = "\n      + ".join(parts)
            lines.append(f"    equation: {joined}")
        lines.append("  }")
    lines.append("}")
    return "\n".join(lines) + "\n"


def _canonical_keys(mapping: dict) -> list:
    return sorted(mapping.keys())
