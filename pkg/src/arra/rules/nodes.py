"""AST node types for the authorization rule language.

Nodes are immutable and compare structurally, so parse/render round-trips
can be checked with plain equality. Formula nodes, term nodes, and
set/domain expressions are separate small hierarchies.
"""

from __future__ import annotations

from dataclasses import dataclass


class Node:
    """Marker base for formula nodes."""


class Term:
    """Marker base for term nodes (variables, literals, atomic attribute use)."""


class SetExpr:
    """Marker base for set/domain expressions."""


# --- terms -------------------------------------------------------------


@dataclass(frozen=True)
class Var(Term):
    name: str


@dataclass(frozen=True)
class Lit(Term):
    value: str


@dataclass(frozen=True)
class AttrOf(Term):
    """Atomic attribute applied to a term, e.g. dept(r1)."""

    attr: str
    item: Term


# --- set / domain expressions -------------------------------------------


@dataclass(frozen=True)
class RolesDom(SetExpr):
    pass


@dataclass(frozen=True)
class ArDom(SetExpr):
    pass


@dataclass(frozen=True)
class AuaDom(SetExpr):
    """The admin-user/admin-role assignment relation; elements are pairs."""


@dataclass(frozen=True)
class ArolesDom(SetExpr):
    """Admin roles assigned to an admin user (ARH-widened when the instance flag says so)."""

    item: Term


@dataclass(frozen=True)
class AttrDom(SetExpr):
    """A set-valued attribute's value, e.g. authRange(ar)."""

    attr: str
    item: Term


@dataclass(frozen=True)
class RangeDom(SetExpr):
    """The open authority range between two role terms."""

    low: Term
    high: Term


@dataclass(frozen=True)
class LitDom(SetExpr):
    values: tuple[str, ...]


# --- relation selector for edge tests ------------------------------------


@dataclass(frozen=True)
class Rel:
    """Which relation an edge test runs against.

    kind: "rh" (direct), "rh+" (strict closure), "rh*" (reflexive closure),
    or "rh*-with" (reflexive closure with one extra hypothetical edge).
    """

    kind: str
    extra: tuple[Term, Term] | None = None


# --- formulas -------------------------------------------------------------


@dataclass(frozen=True)
class Const(Node):
    value: bool


@dataclass(frozen=True)
class And(Node):
    items: tuple[Node, ...]


@dataclass(frozen=True)
class Or(Node):
    items: tuple[Node, ...]


@dataclass(frozen=True)
class Not(Node):
    item: Node


@dataclass(frozen=True)
class Implies(Node):
    left: Node
    right: Node


@dataclass(frozen=True)
class Iff(Node):
    left: Node
    right: Node


@dataclass(frozen=True)
class Exists(Node):
    binders: tuple[str, ...]
    domain: SetExpr
    body: Node


@dataclass(frozen=True)
class ForAll(Node):
    binders: tuple[str, ...]
    domain: SetExpr
    body: Node


@dataclass(frozen=True)
class In(Node):
    item: Term
    coll: SetExpr


@dataclass(frozen=True)
class Eq(Node):
    left: Term
    right: Term


@dataclass(frozen=True)
class Senior(Node):
    left: Term
    right: Term


@dataclass(frozen=True)
class Junior(Node):
    left: Term
    right: Term


@dataclass(frozen=True)
class Incomparable(Node):
    left: Term
    right: Term


@dataclass(frozen=True)
class InRange(Node):
    item: Term
    low: Term
    high: Term


@dataclass(frozen=True)
class EdgeIn(Node):
    """Membership of the (junior, senior) pair in the selected relation."""

    junior: Term
    senior: Term
    rel: Rel


@dataclass(frozen=True)
class Dominates(Node):
    attr: str
    left: SetExpr
    right: SetExpr


# Rule parameters are the only names that are variables without a binder.
PARAMETERS = ("au", "r1", "r2", "r", "chi")


def free_vars(node, bound: frozenset[str] = frozenset()) -> frozenset[str]:
    """Variable names used under `node` that no enclosing binder binds."""
    if isinstance(node, Var):
        return frozenset() if node.name in bound else frozenset({node.name})
    if isinstance(node, (Lit, Const, RolesDom, ArDom, AuaDom)):
        return frozenset()
    if isinstance(node, (Exists, ForAll)):
        inner = bound | frozenset(node.binders)
        return free_vars(node.domain, bound) | free_vars(node.body, inner)
    if isinstance(node, (And, Or)):
        out: frozenset[str] = frozenset()
        for item in node.items:
            out |= free_vars(item, bound)
        return out
    if isinstance(node, Not):
        return free_vars(node.item, bound)
    if isinstance(node, (Implies, Iff, Eq, Senior, Junior, Incomparable)):
        return free_vars(node.left, bound) | free_vars(node.right, bound)
    if isinstance(node, In):
        return free_vars(node.item, bound) | free_vars(node.coll, bound)
    if isinstance(node, InRange):
        return (
            free_vars(node.item, bound)
            | free_vars(node.low, bound)
            | free_vars(node.high, bound)
        )
    if isinstance(node, EdgeIn):
        out = free_vars(node.junior, bound) | free_vars(node.senior, bound)
        if node.rel.extra is not None:
            out |= free_vars(node.rel.extra[0], bound)
            out |= free_vars(node.rel.extra[1], bound)
        return out
    if isinstance(node, Dominates):
        return free_vars(node.left, bound) | free_vars(node.right, bound)
    if isinstance(node, (AttrOf, ArolesDom, AttrDom)):
        return free_vars(node.item, bound)
    if isinstance(node, RangeDom):
        return free_vars(node.low, bound) | free_vars(node.high, bound)
    if isinstance(node, LitDom):
        return frozenset()
    raise TypeError(f"not an AST node: {node!r}")
