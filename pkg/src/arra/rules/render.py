"""Canonical printer for rule ASTs.

render() emits the form parse_rule() accepts. Tokens the tokenizer could
not read back verbatim are quoted, and so are literal tokens that collide
with a rule parameter or an in-scope binder (a bare token in term position
parses as a variable there), so parse(render(ast)) == ast.
"""

from __future__ import annotations

import re

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
    Not,
    Or,
    PARAMETERS,
    RangeDom,
    Rel,
    RolesDom,
    Senior,
    Var,
)

_BARE = re.compile(r'^[^\s()";]+$')
_KEYWORDS = {"true", "false", "roles", "ar", "aua", "rh", "rh+", "rh*"}


def _quote(text: str) -> str:
    return '"' + text.replace("\\", "\\\\").replace('"', '\\"') + '"'


def _name(text: str) -> str:
    return text if _BARE.match(text) else _quote(text)


def render(node, _bound: frozenset[str] = frozenset(PARAMETERS)) -> str:
    b = _bound
    if isinstance(node, Const):
        return "true" if node.value else "false"
    if isinstance(node, And):
        return "(and " + " ".join(render(i, b) for i in node.items) + ")"
    if isinstance(node, Or):
        return "(or " + " ".join(render(i, b) for i in node.items) + ")"
    if isinstance(node, Not):
        return f"(not {render(node.item, b)})"
    if isinstance(node, Implies):
        return f"(implies {render(node.left, b)} {render(node.right, b)})"
    if isinstance(node, Iff):
        return f"(iff {render(node.left, b)} {render(node.right, b)})"
    if isinstance(node, (Exists, ForAll)):
        op = "exists" if isinstance(node, Exists) else "forall"
        if len(node.binders) == 1:
            binder = node.binders[0]
        else:
            binder = "(" + " ".join(node.binders) + ")"
        inner = b | frozenset(node.binders)
        return f"({op} {binder} {render(node.domain, b)} {render(node.body, inner)})"
    if isinstance(node, In):
        return f"(in {render(node.item, b)} {render(node.coll, b)})"
    if isinstance(node, Eq):
        return f"(eq {render(node.left, b)} {render(node.right, b)})"
    if isinstance(node, Senior):
        return f"(senior {render(node.left, b)} {render(node.right, b)})"
    if isinstance(node, Junior):
        return f"(junior {render(node.left, b)} {render(node.right, b)})"
    if isinstance(node, Incomparable):
        return f"(incomparable {render(node.left, b)} {render(node.right, b)})"
    if isinstance(node, InRange):
        return f"(in-range {render(node.item, b)} {render(node.low, b)} {render(node.high, b)})"
    if isinstance(node, EdgeIn):
        return f"(edge {render(node.junior, b)} {render(node.senior, b)} {_rel(node.rel, b)})"
    if isinstance(node, Dominates):
        return f"(dominates {_name(node.attr)} {render(node.left, b)} {render(node.right, b)})"
    if isinstance(node, Var):
        return node.name
    if isinstance(node, Lit):
        if not _BARE.match(node.value) or node.value in _KEYWORDS or node.value in b:
            return _quote(node.value)
        return node.value
    if isinstance(node, AttrOf):
        return f"(attr {_name(node.attr)} {render(node.item, b)})"
    if isinstance(node, RolesDom):
        return "roles"
    if isinstance(node, ArDom):
        return "ar"
    if isinstance(node, AuaDom):
        return "aua"
    if isinstance(node, ArolesDom):
        return f"(aroles {render(node.item, b)})"
    if isinstance(node, AttrDom):
        return f"(attr {_name(node.attr)} {render(node.item, b)})"
    if isinstance(node, RangeDom):
        return f"(range {render(node.low, b)} {render(node.high, b)})"
    if isinstance(node, LitDom):
        return "(lit " + " ".join(_lit_value(v, b) for v in node.values) + ")"
    raise TypeError(f"not an AST node: {node!r}")


def _lit_value(text: str, bound: frozenset[str]) -> str:
    if not _BARE.match(text) or text in _KEYWORDS:
        return _quote(text)
    return text


def _rel(rel: Rel, bound: frozenset[str]) -> str:
    if rel.kind == "rh*-with":
        j, s = rel.extra
        return f"(rh*-with {render(j, bound)} {render(s, bound)})"
    return rel.kind
