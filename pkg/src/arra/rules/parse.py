"""Parser for the parenthesized-prefix rule language.

Grammar (whitespace-insensitive, ';' starts a comment to end of line):

    expr   := (and e+) | (or e+) | (not e) | (implies e e) | (iff e e)
            | (exists VAR domain e) | (forall VAR domain e)
            | (in term setexpr) | (eq term term)
            | (senior term term) | (junior term term) | (incomparable term term)
            | (in-range term term term)
            | (edge term term REL)
            | (dominates ATTR setexpr setexpr) | true | false
    domain := roles | ar | aua | (aroles term) | (attr ATTR term)
            | (range term term) | (lit v+)
    term   := VAR | token | "quoted token" | (attr ATTR term)
    REL    := rh | rh+ | rh* | (rh*-with term term)

VAR is one or, for pair-valued domains, a parenthesized pair of binder
names. A bare token is a variable when an enclosing quantifier binds it or
it is one of the declared rule parameters (au, r1, r2, r, chi); otherwise
it is a literal.
"""

from __future__ import annotations

from dataclasses import dataclass

from ..errors import ParseError
from .nodes import (
    And,
    ArDom,
    ArolesDom,
    AttrDom,
    AttrOf,
    AuaDom,
    Const,
    Dominates,
    EdgeIn,
    Eq,
    Exists,
    ForAll,
    Iff,
    Implies,
    In,
    Incomparable,
    InRange,
    Junior,
    Lit,
    LitDom,
    Node,
    Not,
    Or,
    PARAMETERS,
    RangeDom,
    Rel,
    RolesDom,
    Senior,
    Var,
)

_ATOM_END = set(' \t\r\n()";')


@dataclass(frozen=True)
class _Token:
    kind: str  # "(", ")", "atom", "string"
    text: str
    line: int
    column: int


def _tokenize(source: str) -> list[_Token]:
    tokens: list[_Token] = []
    line, col = 1, 1
    i, n = 0, len(source)
    while i < n:
        c = source[i]
        if c == "\n":
            line += 1
            col = 1
            i += 1
        elif c in " \t\r":
            i += 1
            col += 1
        elif c == ";":
            while i < n and source[i] != "\n":
                i += 1
        elif c in "()":
            tokens.append(_Token(c, c, line, col))
            i += 1
            col += 1
        elif c == '"':
            start_line, start_col = line, col
            i += 1
            col += 1
            chars: list[str] = []
            while True:
                if i >= n:
                    raise ParseError("unterminated quoted token", start_line, start_col)
                c = source[i]
                if c == "\n":
                    raise ParseError("newline inside quoted token", line, col)
                if c == "\\":
                    if i + 1 >= n:
                        raise ParseError("dangling escape", line, col)
                    chars.append(source[i + 1])
                    i += 2
                    col += 2
                elif c == '"':
                    i += 1
                    col += 1
                    break
                else:
                    chars.append(c)
                    i += 1
                    col += 1
            tokens.append(_Token("string", "".join(chars), start_line, start_col))
        else:
            start_line, start_col = line, col
            j = i
            while j < n and source[j] not in _ATOM_END:
                j += 1
            tokens.append(_Token("atom", source[i:j], start_line, start_col))
            col += j - i
            i = j
    return tokens


class _Parser:
    def __init__(self, tokens: list[_Token], parameters: frozenset[str]):
        self.tokens = tokens
        self.pos = 0
        self.parameters = parameters
        self.bound: list[str] = []

    # --- token plumbing ---

    def _peek(self) -> _Token | None:
        return self.tokens[self.pos] if self.pos < len(self.tokens) else None

    def _next(self, expect: str | None = None) -> _Token:
        tok = self._peek()
        if tok is None:
            last = self.tokens[-1] if self.tokens else _Token("atom", "", 1, 1)
            raise ParseError("unexpected end of input", last.line, last.column)
        if expect is not None and tok.kind != expect:
            raise ParseError(f"expected {expect!r}, found {tok.text!r}", tok.line, tok.column)
        self.pos += 1
        return tok

    def _fail(self, tok: _Token, message: str):
        raise ParseError(message, tok.line, tok.column)

    # --- entry point ---

    def parse(self) -> Node:
        expr = self.expr()
        trailing = self._peek()
        if trailing is not None:
            self._fail(trailing, "trailing input after the rule expression")
        return expr

    # --- productions ---

    def expr(self) -> Node:
        tok = self._next()
        if tok.kind == "atom" and tok.text == "true":
            return Const(True)
        if tok.kind == "atom" and tok.text == "false":
            return Const(False)
        if tok.kind != "(":
            self._fail(tok, f"expected an expression, found {tok.text!r}")
        head = self._next()
        if head.kind != "atom":
            self._fail(head, "expected an operator name")
        op = head.text
        if op in ("and", "or"):
            items = [self.expr()]
            while self._peek() is not None and self._peek().kind != ")":
                items.append(self.expr())
            self._next(")")
            return (And if op == "and" else Or)(tuple(items))
        if op == "not":
            item = self.expr()
            self._next(")")
            return Not(item)
        if op in ("implies", "iff"):
            left = self.expr()
            right = self.expr()
            self._next(")")
            return (Implies if op == "implies" else Iff)(left, right)
        if op in ("exists", "forall"):
            binders = self.binders()
            domain = self.domain()
            self.bound.extend(binders)
            body = self.expr()
            del self.bound[-len(binders):]
            self._next(")")
            return (Exists if op == "exists" else ForAll)(binders, domain, body)
        if op == "in":
            item = self.term()
            coll = self.setexpr()
            self._next(")")
            return In(item, coll)
        if op == "eq":
            left = self.term()
            right = self.term()
            self._next(")")
            return Eq(left, right)
        if op in ("senior", "junior", "incomparable"):
            left = self.term()
            right = self.term()
            self._next(")")
            cls = {"senior": Senior, "junior": Junior, "incomparable": Incomparable}[op]
            return cls(left, right)
        if op == "in-range":
            item = self.term()
            low = self.term()
            high = self.term()
            self._next(")")
            return InRange(item, low, high)
        if op == "edge":
            junior = self.term()
            senior = self.term()
            rel = self.rel()
            self._next(")")
            return EdgeIn(junior, senior, rel)
        if op == "dominates":
            attr = self.attr_name()
            left = self.setexpr()
            right = self.setexpr()
            self._next(")")
            return Dominates(attr, left, right)
        self._fail(head, f"unknown operator {op!r}")

    def binders(self) -> tuple[str, ...]:
        tok = self._next()
        if tok.kind == "atom":
            return (tok.text,)
        if tok.kind == "(":
            names: list[str] = []
            while True:
                inner = self._next()
                if inner.kind == ")":
                    break
                if inner.kind != "atom":
                    self._fail(inner, "binder names must be bare tokens")
                names.append(inner.text)
            if len(names) != 2:
                self._fail(tok, "a pair binder takes exactly two names")
            return tuple(names)
        self._fail(tok, "expected a binder")

    def domain(self) -> object:
        return self.setexpr()

    def setexpr(self) -> object:
        tok = self._next()
        if tok.kind == "atom":
            if tok.text == "roles":
                return RolesDom()
            if tok.text == "ar":
                return ArDom()
            if tok.text == "aua":
                return AuaDom()
            self._fail(tok, f"unknown set expression {tok.text!r}")
        if tok.kind != "(":
            self._fail(tok, "expected a set expression")
        head = self._next()
        if head.kind != "atom":
            self._fail(head, "expected a set operator")
        if head.text == "aroles":
            item = self.term()
            self._next(")")
            return ArolesDom(item)
        if head.text == "attr":
            attr = self.attr_name()
            item = self.term()
            self._next(")")
            return AttrDom(attr, item)
        if head.text == "range":
            low = self.term()
            high = self.term()
            self._next(")")
            return RangeDom(low, high)
        if head.text == "lit":
            values: list[str] = []
            while self._peek() is not None and self._peek().kind != ")":
                v = self._next()
                if v.kind not in ("atom", "string"):
                    self._fail(v, "literal sets hold bare or quoted tokens")
                values.append(v.text)
            self._next(")")
            if not values:
                self._fail(head, "a literal set needs at least one value")
            return LitDom(tuple(values))
        self._fail(head, f"unknown set operator {head.text!r}")

    def term(self) -> object:
        tok = self._next()
        if tok.kind == "string":
            return Lit(tok.text)
        if tok.kind == "atom":
            if tok.text in self.bound or tok.text in self.parameters:
                return Var(tok.text)
            return Lit(tok.text)
        if tok.kind == "(":
            head = self._next()
            if head.kind != "atom" or head.text != "attr":
                self._fail(head, "only (attr NAME term) may appear in term position")
            attr = self.attr_name()
            item = self.term()
            self._next(")")
            return AttrOf(attr, item)
        self._fail(tok, "expected a term")

    def attr_name(self) -> str:
        tok = self._next()
        if tok.kind not in ("atom", "string"):
            self._fail(tok, "expected an attribute name")
        return tok.text

    def rel(self) -> Rel:
        tok = self._next()
        if tok.kind == "atom":
            if tok.text in ("rh", "rh+", "rh*"):
                return Rel(tok.text)
            self._fail(tok, f"unknown relation {tok.text!r}")
        if tok.kind != "(":
            self._fail(tok, "expected a relation")
        head = self._next()
        if head.kind != "atom" or head.text != "rh*-with":
            self._fail(head, "expected rh, rh+, rh*, or (rh*-with term term)")
        junior = self.term()
        senior = self.term()
        self._next(")")
        return Rel("rh*-with", (junior, senior))


def parse_rule(source: str, parameters=PARAMETERS) -> Node:
    """Parse rule source into an AST.

    `parameters` names the tokens treated as free variables of the rule;
    every other bare token is a literal.
    """
    tokens = _tokenize(source)
    if not tokens:
        raise ParseError("empty rule source", 1, 1)
    return _Parser(tokens, frozenset(parameters)).parse()
